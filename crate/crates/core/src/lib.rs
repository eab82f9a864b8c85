//! Sensitivity analysis for polynomial threshold functions (PTFs).
//!
//! A PTF is `f(x) = sign(P(x) - θ)` for a real multivariate polynomial `P`.
//! This crate computes influences, average sensitivity and noise
//! sensitivity of PTFs over the uniform hypercube (exactly for small `n`,
//! by Monte Carlo otherwise), Gaussian noise sensitivity through the
//! Hermite basis, and the regularity / critical-index structure used to
//! decompose arbitrary PTFs into regular or nearly-constant pieces.
//!
//! The core math is generic over the coefficient type through [`Scalar`]
//! (implemented for `f32` and `f64`); the `*F64` aliases below are what
//! most callers want.
//!
//! Conventions used everywhere:
//! - `sign(0) = +1`.
//! - Variables are 0-based. In a truth table index `i`, bit `b` set means
//!   `x_b = +1`, clear means `x_b = -1`.
//! - Randomness comes from counter-based streams keyed by `(seed, sample
//!   index)`, so every Monte Carlo result is independent of the number of
//!   worker threads.

pub mod error;
pub mod estimate;
pub mod gaussian;
pub mod hypercube;
pub mod learn;
pub mod limits;
pub mod poly;
pub mod rng;
pub mod scalar;
pub mod structure;
pub mod verify;

pub use error::{Error, Result};
pub use estimate::{Estimate, MeanEstimate, Measured};
pub use poly::{CoefficientModel, Monomial, Polynomial, Ptf, Restriction};
pub use scalar::Scalar;

/// Double-precision polynomial.
pub type PolynomialF64 = Polynomial<f64>;
/// Single-precision polynomial.
pub type PolynomialF32 = Polynomial<f32>;
/// Double-precision threshold function.
pub type PtfF64 = Ptf<f64>;
/// Single-precision threshold function.
pub type PtfF32 = Ptf<f32>;
/// Double-precision Hermite expansion.
pub type HermiteExpansionF64 = gaussian::HermiteExpansion<f64>;
/// Double-precision weight profile.
pub type WeightProfileF64 = structure::WeightProfile<f64>;
