//! Graph spheres over centered coordinate spheres: geometry, the constant
//! mean curvature equation, continuation, the Jacobi spectrum and the
//! curvature identities used to validate the discretization.

pub mod estimates;
pub mod grid;
pub mod identities;
pub mod newton;
pub mod spectrum;
pub mod surface;

pub use grid::{GridMode, SphereGrid};
pub use newton::{continuation_path, newton_solve_cmc, CmcSolution, ContinuationOptions, ContinuationReport, NewtonOptions, NewtonReport};
pub use spectrum::{jacobi_spectrum, jacobi_spectrum_checked, SpectrumReport};
pub use surface::{GraphSurface, NodeField, SurfacePoint};
