//! Metrics, curvature, and hypersurface geometry on the asymptotic chart.

pub mod curvature;
pub mod hypersurface;
pub mod metric;
pub mod schwarzschild;
pub mod spec;
pub mod tensor;

pub use curvature::{curvature_at, CurvatureMethod, CurvatureSample};
pub use metric::{MetricField, MetricSample};
pub use schwarzschild::{horizon_radius, sphere_area, sphere_mean_curvature};
pub use spec::{ManifoldSpec, Parity, PerturbationSpec, RadialProfile};
pub use tensor::{kulkarni_nomizu, Tensor4};
