//! Numerical building blocks shared by the geometry modules.

pub mod dual;
pub mod fit;
pub mod jet;
pub mod ode;
pub mod quadrature;
