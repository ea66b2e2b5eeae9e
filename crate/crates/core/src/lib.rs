//! Numerical laboratory for the Lagrange bitop, the integrable Euler–Poisson
//! system on so(4) x so(4) with inertia `diag(a, a, b, b)`.

pub mod algebra;
pub mod dynamics;
pub mod error;
pub mod hierarchy;
pub mod invariants;
pub mod poly;
pub mod reduction;
pub mod sampling;
pub mod spectral;

pub use error::{Error, Result};
