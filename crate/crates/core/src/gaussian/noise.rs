use rand::Rng;

use super::hermite::hermite_expand;
use crate::error::{invalid, Result};
use crate::estimate::{Estimate, MeanEstimate};
use crate::hypercube::McConfig;
use crate::poly::{CompiledPolynomial, CompiledPtf, Polynomial, Ptf};
use crate::rng::{count_hits_with, fill_normals, sum_moments_with, Streams};
use crate::scalar::Scalar;

pub(crate) fn check_open_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("delta {delta} must lie in (0, 1)")))
    }
}

/// `δ`-correlated standard Gaussians: `Z = (1−δ)X + √(2δ−δ²) Y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianPair {
    delta: f64,
}

impl GaussianPair {
    pub fn new(delta: f64) -> Result<Self> {
        check_open_delta(delta)?;
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Per-coordinate correlation `1 − δ`.
    pub fn correlation(&self) -> f64 {
        1.0 - self.delta
    }

    /// `√(2δ − δ²)`.
    pub fn rho(&self) -> f64 {
        (2.0 * self.delta - self.delta * self.delta).sqrt()
    }

    /// Fills `x` with a standard normal vector and `z` with its partner.
    pub fn sample<T: Scalar, R: Rng>(&self, rng: &mut R, x: &mut [T], z: &mut [T]) {
        fill_normals(rng, x);
        fill_normals(rng, z);
        let a = T::from_f64_lossy(self.correlation());
        let b = T::from_f64_lossy(self.rho());
        for (zi, &xi) in z.iter_mut().zip(x.iter()) {
            *zi = a * xi + b * *zi;
        }
    }
}

/// Estimate of `GNS_δ(f) = Pr[f(X) != f(Z)]`.
pub fn gns_mc<T: Scalar>(f: &Ptf<T>, delta: f64, cfg: &McConfig) -> Result<Estimate> {
    let pair = GaussianPair::new(delta)?;
    cfg.check()?;
    let n = f.n();
    let c = CompiledPtf::new(f);
    let streams = Streams::new(cfg.seed);
    let hits = count_hits_with(
        &streams,
        cfg.samples,
        || (vec![T::zero(); n], vec![T::zero(); n]),
        |(x, z), rng| {
            pair.sample(rng, x, z);
            c.evaluate(x) != c.evaluate(z)
        },
    );
    Estimate::from_hits(hits, cfg.samples, cfg.confidence, cfg.seed)
}

/// `‖Q‖² = E[(P(Z) − P(X))²]`, closed form through the Hermite expansion.
pub fn perturbation_norm_sq<T: Scalar>(p: &Polynomial<T>, delta: f64) -> Result<f64> {
    check_open_delta(delta)?;
    Ok(hermite_expand(p).perturbation_norm_sq(delta))
}

/// Sample mean of `(P(Z) − P(X))²`.
pub fn perturbation_norm_sq_mc<T: Scalar>(
    p: &Polynomial<T>,
    delta: f64,
    samples: u64,
    seed: u64,
) -> Result<MeanEstimate> {
    let pair = GaussianPair::new(delta)?;
    if samples < 2 {
        return Err(invalid("at least two samples are required"));
    }
    let n = p.n();
    let c = CompiledPolynomial::new(p);
    let streams = Streams::new(seed);
    let (sum, sum_sq) = sum_moments_with(
        &streams,
        samples,
        || (vec![T::zero(); n], vec![T::zero(); n]),
        |(x, z), rng| {
            pair.sample(rng, x, z);
            let d = (c.evaluate(z) - c.evaluate(x)).as_f64();
            d * d
        },
    );
    Ok(MeanEstimate::from_moments(sum, sum_sq, samples, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::HermiteExpansion;
    use crate::poly::Monomial;
    use crate::rng::sum_vectors;

    #[test]
    fn rejects_bad_delta() {
        assert!(GaussianPair::new(0.0).is_err());
        assert!(GaussianPair::new(1.0).is_err());
        let f = Ptf::<f64>::dictator(1, 0);
        assert!(gns_mc(&f, 1.5, &McConfig::new(10, 0.9, 0)).is_err());
    }

    #[test]
    fn dictator_gns_covers_arccos() {
        let f = Ptf::<f64>::dictator(1, 0);
        let est = gns_mc(&f, 0.5, &McConfig::new(200_000, 0.99, 3)).unwrap();
        assert!(est.covers(0.5f64.acos() / std::f64::consts::PI), "{est:?}");
        let tiny = gns_mc(&f, 1e-6, &McConfig::new(50_000, 0.99, 3)).unwrap();
        assert!(tiny.value < 0.01);
    }

    #[test]
    fn pair_marginals() {
        let pair = GaussianPair::new(0.3).unwrap();
        let m = 200_000u64;
        let streams = Streams::new(8);
        let s = sum_vectors(&streams, m, 5, |rng, out| {
            let mut x = [0.0f64];
            let mut z = [0.0f64];
            pair.sample(rng, &mut x, &mut z);
            out[0] = z[0];
            out[1] = z[0] * z[0];
            out[2] = x[0] * z[0];
            out[3] = z[0].powi(4);
            out[4] = (x[0] * z[0]).powi(2);
        });
        let mf = m as f64;
        let mean = s[0] / mf;
        let var = s[1] / mf - mean * mean;
        let cov = s[2] / mf;
        assert!(mean.abs() < 4.0 / mf.sqrt());
        // Var(Z²) = 2 for a standard normal.
        assert!((var - 1.0).abs() < 4.0 * (2.0 / mf).sqrt());
        let cov_sd = ((s[4] / mf - cov * cov) / mf).sqrt();
        assert!((cov - 0.7).abs() < 4.0 * cov_sd);
    }

    #[test]
    fn perturbation_mc_matches_closed_form() {
        let h3 = HermiteExpansion::from_coefficients(1, [(Monomial::new(vec![(0, 3)]).unwrap(), 1.0)])
            .unwrap()
            .to_polynomial();
        let closed = perturbation_norm_sq(&h3, 0.1).unwrap();
        assert!((closed - 0.542).abs() < 1e-9);
        let mc = perturbation_norm_sq_mc(&h3, 0.1, 200_000, 1).unwrap();
        assert!(mc.within(closed, 3.0), "{mc:?} vs {closed}");
        let x = Polynomial::<f64>::linear(&[1.0]);
        assert!((perturbation_norm_sq(&x, 0.25).unwrap() - 0.5).abs() < 1e-15);
    }
}
