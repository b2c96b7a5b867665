//! Desk-scale numerical laboratory for asymptotically Schwarzschild initial
//! data: coordinate-sphere geometry, volume-preserving charts, constant mean
//! curvature graph spheres and their Jacobi spectra, center-of-mass flux
//! integrals, Hawking mass, and isoperimetric mass.

pub mod acceptance;
pub mod bray;
pub mod config;
pub mod cmc;
pub mod error;
pub mod geometry;
pub mod io;
pub mod iso_mass;
pub mod mass_center;
pub mod numerics;
pub mod quasilocal;

pub use error::{Error, Result};
