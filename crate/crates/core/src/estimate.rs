//! Monte Carlo result types.

use crate::error::{invalid, Result};

/// Bernoulli-mean estimate with a two-sided Hoeffding interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub half_width: f64,
    pub confidence: f64,
    pub samples: u64,
    pub seed: u64,
}

impl Estimate {
    /// `sqrt(ln(2 / (1 - confidence)) / (2 samples))`.
    pub fn hoeffding_half_width(samples: u64, confidence: f64) -> f64 {
        ((2.0 / (1.0 - confidence)).ln() / (2.0 * samples as f64)).sqrt()
    }

    pub fn from_hits(hits: u64, samples: u64, confidence: f64, seed: u64) -> Result<Self> {
        check_mc_params(samples, confidence)?;
        Ok(Self {
            value: hits as f64 / samples as f64,
            half_width: Self::hoeffding_half_width(samples, confidence),
            confidence,
            samples,
            seed,
        })
    }

    pub fn lower(&self) -> f64 {
        self.value - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.value + self.half_width
    }

    pub fn covers(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.half_width
    }
}

pub(crate) fn check_mc_params(samples: u64, confidence: f64) -> Result<()> {
    if samples == 0 {
        return Err(invalid("samples must be >= 1"));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(invalid(format!("confidence {confidence} not in (0,1)")));
    }
    Ok(())
}

/// Sample mean of a real-valued quantity with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl MeanEstimate {
    pub fn from_moments(sum: f64, sum_sq: f64, samples: u64, seed: u64) -> Self {
        let m = samples as f64;
        let mean = sum / m;
        let var = if samples > 1 {
            ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0)
        } else {
            0.0
        };
        Self { mean, std_error: (var / m).sqrt(), samples, seed }
    }

    /// `|mean - x| <= k` standard errors.
    pub fn within(&self, x: f64, k: f64) -> bool {
        (self.mean - x).abs() <= k * self.std_error
    }
}

/// A probability that is either computed exactly or estimated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Measured {
    Exact(f64),
    Sampled(Estimate),
}

impl Measured {
    pub fn value(&self) -> f64 {
        match self {
            Measured::Exact(v) => *v,
            Measured::Sampled(e) => e.value,
        }
    }

    pub fn lower(&self) -> f64 {
        match self {
            Measured::Exact(v) => *v,
            Measured::Sampled(e) => e.lower(),
        }
    }

    pub fn upper(&self) -> f64 {
        match self {
            Measured::Exact(v) => *v,
            Measured::Sampled(e) => e.upper(),
        }
    }

    pub fn half_width(&self) -> f64 {
        match self {
            Measured::Exact(_) => 0.0,
            Measured::Sampled(e) => e.half_width,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_interval_is_vacuous() {
        let e = Estimate::from_hits(0, 1, 0.99, 0).unwrap();
        assert!(e.half_width >= 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Estimate::from_hits(0, 0, 0.9, 0).is_err());
        assert!(Estimate::from_hits(0, 10, 1.0, 0).is_err());
    }

    #[test]
    fn hoeffding_width_formula() {
        let w = Estimate::hoeffding_half_width(1_000_000, 0.99);
        let expected = ((2.0f64 / 0.01).ln() / 2e6).sqrt();
        assert!((w - expected).abs() <= 1e-15 * expected);
    }
}
