//! Anisotropic total variation with signed measure data.
//!
//! Exact perimeters and certificate checks live in [`exactgeo`]; the
//! finite-volume discretization in [`grid`]; isoperimetric-condition
//! verifiers in [`icheck`]; minimizers of the discrete functionals in
//! [`solve`]; and the worked-example catalog in [`gallery`].

pub mod exactgeo;
pub mod expr;
pub mod gallery;
pub mod grid;
pub mod icheck;
pub mod integrand;
mod maxflow;
pub mod pdhg;
pub mod quad;
pub mod scenario;
pub mod solve;
pub mod vec2;

pub use integrand::{Integrand, IntegrandError, IntegrandSpec};
