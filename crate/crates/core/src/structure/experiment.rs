use rand::RngCore;

use super::determining::{determining_test, Evaluation};
use super::weights::{check_epsilon, WeightProfile};
use crate::error::{Error, Result};
use crate::estimate::{check_mc_params, Estimate, Measured};
use crate::poly::{Ptf, Restriction};
use crate::rng::{count_hits, splitmix64, Streams};
use crate::scalar::Scalar;

/// Degree-dependent multipliers. Defaults: `a = b = c = 1`,
/// `α = β = γ = δ = 0.05`, `Δ = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructureConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub big_delta: f64,
}

impl Default for StructureConstants {
    fn default() -> Self {
        Self { a: 1.0, b: 1.0, c: 1.0, alpha: 0.05, beta: 0.05, gamma: 0.05, delta: 0.05, big_delta: 1.0 }
    }
}

impl StructureConstants {
    /// `L = ceil(c ln(1/ε) / ε²)`, at least 1.
    pub fn block_size(&self, epsilon: f64) -> usize {
        let l = (self.c * (1.0 / epsilon).ln() / (epsilon * epsilon)).ceil();
        if l.is_finite() && l >= 1.0 {
            l as usize
        } else {
            1
        }
    }

    /// `t = ceil(ln(1/ε) / ln(1/(1-α)))`, at least 1.
    pub fn depth_cap(&self, epsilon: f64) -> usize {
        let t = ((1.0 / epsilon).ln() / (1.0 / (1.0 - self.alpha)).ln()).ceil();
        if t.is_finite() && t >= 1.0 {
            t as usize
        } else {
            1
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExperimentMode {
    /// Restrict the top `K(P,ε)` variables; success when the result is
    /// `aε`-regular.
    Regularity,
    /// Restrict the top `L` variables; success when the restriction is
    /// `bε`-determining. Inconclusive tests count as failures.
    Determining,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub trials: u64,
    pub confidence: f64,
    pub seed: u64,
    pub constants: StructureConstants,
    /// Used by determining tests on the restricted function.
    pub evaluation: Evaluation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    /// Fraction of restrictions satisfying the mode's predicate.
    pub probability: Measured,
    /// Variables restricted, in decreasing-weight order.
    pub restricted: Vec<usize>,
    pub critical_index: usize,
    /// Whether every assignment was enumerated.
    pub exhaustive: bool,
}

fn assignment(vars: &[usize], bits: u64) -> Restriction {
    let pairs = vars.iter().enumerate().map(|(k, &v)| (v, if (bits >> k) & 1 == 1 { 1 } else { -1 }));
    Restriction::from_pairs(pairs).expect("±1 values")
}

fn random_assignment(vars: &[usize], rng: &mut impl RngCore) -> Restriction {
    let pairs = vars.iter().map(|&v| (v, if rng.next_u32() & 1 == 1 { 1 } else { -1 }));
    Restriction::from_pairs(pairs).expect("±1 values")
}

/// Probability that a uniformly random restriction of the heaviest
/// variables satisfies the mode's predicate. Enumerates all assignments
/// when there are at most `trials` of them.
pub fn restriction_experiment<T: Scalar>(
    f: &Ptf<T>,
    epsilon: f64,
    mode: ExperimentMode,
    cfg: &ExperimentConfig,
) -> Result<ExperimentResult> {
    check_epsilon(epsilon)?;
    check_mc_params(cfg.trials, cfg.confidence)?;
    let profile = WeightProfile::new(&f.poly)?;
    let k = profile.critical_index(epsilon)?;
    let block = match mode {
        ExperimentMode::Regularity => k,
        ExperimentMode::Determining => {
            let l = cfg.constants.block_size(epsilon);
            if k < l {
                return Err(Error::CriticalIndexTooSmall { k, l });
            }
            l
        }
    };
    let vars = profile.top(block).to_vec();
    let a_eps = cfg.constants.a * epsilon;
    let b_eps = cfg.constants.b * epsilon;
    let predicate = |r: &Restriction, inner_seed: u64| -> bool {
        match mode {
            ExperimentMode::Regularity => match WeightProfile::of_restriction(&f.poly, r) {
                Ok(w) => w.is_regular(a_eps).unwrap_or(false),
                Err(_) => false,
            },
            ExperimentMode::Determining => {
                determining_test(f, r, b_eps, &cfg.evaluation.reseeded(inner_seed))
                    .map(|d| d.is_determining())
                    .unwrap_or(false)
            }
        }
    };
    let exhaustive = block < 63 && (1u64 << block) <= cfg.trials;
    let probability = if exhaustive {
        let total = 1u64 << block;
        let hits = (0..total)
            .filter(|&bits| predicate(&assignment(&vars, bits), splitmix64(cfg.seed ^ bits)))
            .count();
        Measured::Exact(hits as f64 / total as f64)
    } else {
        let streams = Streams::with_domain(cfg.seed, 0x7265_7374);
        let hits = count_hits(&streams, cfg.trials, |rng| {
            let r = random_assignment(&vars, rng);
            let inner = rng.next_u64();
            predicate(&r, inner)
        });
        Measured::Sampled(Estimate::from_hits(hits, cfg.trials, cfg.confidence, cfg.seed)?)
    };
    Ok(ExperimentResult { probability, restricted: vars, critical_index: k, exhaustive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercube::McConfig;
    use crate::poly::{random_ptf, CoefficientModel, Polynomial};

    fn cfg(trials: u64) -> ExperimentConfig {
        ExperimentConfig {
            trials,
            confidence: 0.95,
            seed: 11,
            constants: StructureConstants::default(),
            evaluation: Evaluation::auto(McConfig::new(4000, 0.95, 0)),
        }
    }

    #[test]
    fn constants() {
        let c = StructureConstants::default();
        // ln 4 / 0.0625 = 22.18
        assert_eq!(c.block_size(0.25), 23);
        // ln 4 / ln(1/0.95) = 27.03
        assert_eq!(c.depth_cap(0.25), 28);
        assert_eq!(c.block_size(2.0), 1);
    }

    #[test]
    fn regular_input_gives_certain_success() {
        let f = Ptf::<f64>::majority(16);
        let res = restriction_experiment(&f, 0.25, ExperimentMode::Regularity, &cfg(10)).unwrap();
        assert_eq!(res.critical_index, 0);
        assert_eq!(res.probability, Measured::Exact(1.0));
    }

    #[test]
    fn heavy_head_restriction() {
        let mut coeffs = vec![1.0; 11];
        coeffs[0] = 4.0;
        let f = Ptf::new(Polynomial::linear(&coeffs), 0.0);
        // K = 1 at ε = 0.5: 16 > 0.25 * 26, then 1 <= 0.25 * 10.
        let res = restriction_experiment(&f, 0.5, ExperimentMode::Regularity, &cfg(10)).unwrap();
        assert_eq!(res.critical_index, 1);
        assert_eq!(res.restricted, vec![0]);
        assert!(res.exhaustive);
        // Σ_{i>=1} x_i over 10 variables: Σw⁴ = 10 <= 0.25 * 100.
        assert_eq!(res.probability, Measured::Exact(1.0));
    }

    #[test]
    fn determining_mode_needs_large_critical_index() {
        let f = Ptf::<f64>::majority(8);
        let err = restriction_experiment(&f, 0.25, ExperimentMode::Determining, &cfg(10));
        assert!(matches!(err, Err(Error::CriticalIndexTooSmall { k: 8, l: 23 })));
    }

    #[test]
    fn random_quadratic_sometimes_becomes_regular() {
        let f = random_ptf::<f64>(20, 2, CoefficientModel::UnitGaussian, 3).unwrap();
        let res = restriction_experiment(&f, 0.3, ExperimentMode::Regularity, &cfg(2000)).unwrap();
        assert!(res.probability.value() > 0.0);
    }
}
