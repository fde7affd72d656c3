//! Monte Carlo laboratory for multiplicative (ρ,ζ)-Brownian motions on
//! GL(N,ℂ): elliptic Gaussian drivers, the discretized matrix flow, spectral
//! statistics of its endpoints, Brown-measure support geometry, and
//! Schwinger–Dyson checks for GUE tuples.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the double-precision instantiation used by default.

#![allow(clippy::assign_op_pattern, clippy::neg_cmp_op_on_partial_ord)]

pub mod brownmap;
pub mod error;
pub mod glflow;
pub mod linalg;
pub mod matrix;
pub mod montecarlo;
pub mod ncpoly;
pub mod params;
pub mod rng;
pub mod sampling;
pub mod scalar;
pub mod spectral;
pub mod stats;

pub use error::{GlbmError, Result};
pub use matrix::Matrix;
pub use num_complex::Complex;
pub use rng::RngStream;
pub use scalar::Real;

/// Double-precision complex scalar.
pub type C64 = Complex<f64>;
/// Dense double-precision complex matrix.
pub type ComplexMatrix = Matrix<f64>;
/// Dense single-precision complex matrix.
pub type ComplexMatrix32 = Matrix<f32>;
/// Double-precision elliptic parameters.
pub type Params = params::EllipticParams<f64>;
