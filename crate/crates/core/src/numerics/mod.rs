//! Generic numerical kernels: quadrature, bracketed root finding and an
//! adaptive Runge–Kutta integrator.

pub mod ode;
pub mod quad;
pub mod root;

pub use ode::{OdeConfig, Outcome, Trajectory};
pub use quad::{QuadConfig, QuadResult};
pub use root::{Root, RootConfig};
