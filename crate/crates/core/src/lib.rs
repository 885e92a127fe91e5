//! Numerical toolkit for integro-differential operators with slowly varying
//! jump kernels: scale functions, characteristic exponents, heat kernels and
//! their derivative estimates, spectral application of the operators, a
//! Duhamel solver for the forced parabolic equation, and the
//! Calderon-Zygmund diagnostic harness.

pub mod bessel;
pub mod config;
pub mod error;
pub mod grid;
pub mod harness;
pub mod heat;
pub mod heat_bounds;
pub mod jet;
pub mod kernels;
pub mod quad;
pub mod report;
pub mod roots;
pub mod scale;
pub mod solver;
pub mod spectral;
pub mod symbol;

pub use error::{Error, Result};
