//! Hermite basis, Gaussian noise sensitivity and Gaussian-measure checks.

mod hermite;
mod measures;
mod noise;

pub use hermite::{
    hermite_derivative, hermite_expand, hermite_multi, hermite_table, hermite_taylor,
    hermite_univariate, norm_sq_gaussian, HermiteExpansion,
};
pub use measures::{anticoncentration, invariance_gap, InvarianceGap, Measure};
pub use noise::{gns_mc, perturbation_norm_sq, perturbation_norm_sq_mc, GaussianPair};
