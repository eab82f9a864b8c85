use rand::Rng;

use super::check_delta;
use crate::error::{Error, Result};
use crate::estimate::{check_mc_params, Estimate};
use crate::poly::{sign, CompiledPtf, Ptf};
use crate::rng::{count_hits_with, fill_signs, for_each_flip, Streams};
use crate::scalar::Scalar;

/// Sample count, confidence level and seed of a Monte Carlo run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McConfig {
    pub samples: u64,
    pub confidence: f64,
    pub seed: u64,
}

impl McConfig {
    pub fn new(samples: u64, confidence: f64, seed: u64) -> Self {
        Self { samples, confidence, seed }
    }

    pub(crate) fn check(&self) -> Result<()> {
        check_mc_params(self.samples, self.confidence)
    }
}

/// Estimate of `NS_δ(f) = Pr[f(X) != f(Z)]`, `Z` flipping each bit of `X`
/// independently with probability `δ`.
pub fn ns_mc<T: Scalar>(f: &Ptf<T>, delta: f64, cfg: &McConfig) -> Result<Estimate> {
    check_delta(delta)?;
    cfg.check()?;
    let n = f.n();
    let c = CompiledPtf::new(f);
    let streams = Streams::new(cfg.seed);
    let hits = count_hits_with(
        &streams,
        cfg.samples,
        || (vec![T::zero(); n], Vec::new(), vec![false; n]),
        |(x, flips, mark), rng| {
            fill_signs(rng, x);
            let before = c.poly.evaluate(x);
            flips.clear();
            for_each_flip(rng, n, delta, |i| flips.push(i));
            let after = if c.poly.is_multilinear() {
                c.poly.value_after_flips(x, before, flips, mark)
            } else {
                for &i in flips.iter() {
                    x[i] = -x[i];
                }
                c.poly.evaluate(x)
            };
            sign(before - c.theta) != sign(after - c.theta)
        },
    );
    Estimate::from_hits(hits, cfg.samples, cfg.confidence, cfg.seed)
}

/// Estimate of the influence of coordinate `i`.
pub fn influence_mc<T: Scalar>(f: &Ptf<T>, i: usize, cfg: &McConfig) -> Result<Estimate> {
    cfg.check()?;
    let n = f.n();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let c = CompiledPtf::new(f);
    let streams = Streams::new(cfg.seed);
    let hits = count_hits_with(
        &streams,
        cfg.samples,
        || vec![T::zero(); n],
        |x, rng| {
            fill_signs(rng, x);
            let before = c.evaluate(x);
            x[i] = -x[i];
            before != c.evaluate(x)
        },
    );
    Estimate::from_hits(hits, cfg.samples, cfg.confidence, cfg.seed)
}

/// Estimate of `AS(f) = n Pr_{x, i}[f(x) != f(x^(i))]` with `i` uniform;
/// value and half-width are scaled by `n`.
pub fn as_mc<T: Scalar>(f: &Ptf<T>, cfg: &McConfig) -> Result<Estimate> {
    cfg.check()?;
    let n = f.n();
    if n == 0 {
        return Estimate::from_hits(0, cfg.samples, cfg.confidence, cfg.seed);
    }
    let c = CompiledPtf::new(f);
    let streams = Streams::new(cfg.seed);
    let hits = count_hits_with(
        &streams,
        cfg.samples,
        || vec![T::zero(); n],
        |x, rng| {
            fill_signs(rng, x);
            let i = rng.random_range(0..n);
            let before = c.evaluate(x);
            x[i] = -x[i];
            before != c.evaluate(x)
        },
    );
    let mut e = Estimate::from_hits(hits, cfg.samples, cfg.confidence, cfg.seed)?;
    e.value *= n as f64;
    e.half_width *= n as f64;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercube::{average_sensitivity_exact, ns_exact_direct, TruthTable};
    use crate::rng::with_workers;

    #[test]
    fn dictator_noise_sensitivity_covers_delta() {
        let f = Ptf::<f64>::dictator(1, 0);
        let e = ns_mc(&f, 0.2, &McConfig::new(1_000_000, 0.99, 5)).unwrap();
        assert!(e.covers(0.2), "{e:?}");
    }

    #[test]
    fn majority3_covers_exact_value() {
        let f = Ptf::<f64>::majority(3);
        let e = ns_mc(&f, 0.1, &McConfig::new(1_000_000, 0.99, 6)).unwrap();
        let exact = ns_exact_direct(&TruthTable::from_ptf(&f).unwrap(), 0.1).unwrap();
        assert!(e.covers(exact), "{e:?} vs {exact}");
    }

    #[test]
    fn single_sample_is_well_formed() {
        let f = Ptf::<f64>::majority(3);
        let e = ns_mc(&f, 0.1, &McConfig::new(1, 0.99, 0)).unwrap();
        assert!(e.half_width >= 1.0);
        assert!(e.value == 0.0 || e.value == 1.0);
    }

    #[test]
    fn invalid_parameters() {
        let f = Ptf::<f64>::majority(3);
        assert!(ns_mc(&f, 0.0, &McConfig::new(10, 0.9, 0)).is_err());
        assert!(ns_mc(&f, 0.1, &McConfig::new(0, 0.9, 0)).is_err());
        assert!(influence_mc(&f, 3, &McConfig::new(10, 0.9, 0)).is_err());
    }

    #[test]
    fn influence_and_as_cover_exact() {
        let f = Ptf::<f64>::majority(5);
        let t = TruthTable::from_ptf(&f).unwrap();
        let cfg = McConfig::new(200_000, 0.99, 8);
        let e = as_mc(&f, &cfg).unwrap();
        assert!(e.covers(average_sensitivity_exact(&t)));
        let i = influence_mc(&f, 2, &cfg).unwrap();
        assert!(i.covers(0.375));
    }

    #[test]
    fn worker_count_does_not_change_result() {
        let f = Ptf::<f64>::majority(9);
        let cfg = McConfig::new(50_000, 0.95, 77);
        let a = with_workers(1, || ns_mc(&f, 0.05, &cfg).unwrap());
        let b = with_workers(8, || ns_mc(&f, 0.05, &cfg).unwrap());
        assert_eq!(a, b);
    }
}
