use super::hermite::norm_sq_gaussian;
use crate::error::{invalid, Error, Result};
use crate::estimate::{Estimate, Measured};
use crate::hypercube::{cube_values, McConfig};
use crate::poly::{CompiledPolynomial, Polynomial};
use crate::rng::{count_hits_with, fill_normals, sum_vectors, Streams};
use crate::scalar::Scalar;
use crate::structure::WeightProfile;

/// Underlying distribution of the input point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Measure {
    /// Standard Gaussian, sampled.
    GaussianMc(McConfig),
    /// Uniform on `{±1}^n`, by full enumeration.
    HypercubeExact,
}

fn normalize<T: Scalar>(p: &Polynomial<T>) -> Result<Polynomial<T>> {
    let norm = norm_sq_gaussian(p).sqrt();
    if norm.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    Ok(p.scale(norm.recip()))
}

/// `Pr[P(x)/‖P‖ ∈ [a, a+α]]` under the chosen measure.
pub fn anticoncentration<T: Scalar>(p: &Polynomial<T>, a: f64, alpha: f64, measure: &Measure) -> Result<Measured> {
    if alpha.is_nan() || alpha < 0.0 || !a.is_finite() || !alpha.is_finite() {
        return Err(invalid(format!("interval [{a}, {a} + {alpha}] is not valid")));
    }
    let q = normalize(p)?;
    let lo = T::from_f64_lossy(a);
    let hi = T::from_f64_lossy(a + alpha);
    match measure {
        Measure::HypercubeExact => {
            let values = cube_values(&q)?;
            let hits = values.iter().filter(|&&v| v >= lo && v <= hi).count();
            Ok(Measured::Exact(hits as f64 / values.len() as f64))
        }
        Measure::GaussianMc(cfg) => {
            cfg.check()?;
            if alpha == 0.0 {
                return Ok(Measured::Exact(0.0));
            }
            let n = q.n();
            let c = CompiledPolynomial::new(&q);
            let streams = Streams::new(cfg.seed);
            let hits = count_hits_with(
                &streams,
                cfg.samples,
                || vec![T::zero(); n],
                |x, rng| {
                    fill_normals(rng, x);
                    let v = c.evaluate(x);
                    v >= lo && v <= hi
                },
            );
            Ok(Measured::Sampled(Estimate::from_hits(hits, cfg.samples, cfg.confidence, cfg.seed)?))
        }
    }
}

/// Largest CDF difference between the cube and the Gaussian over a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceGap {
    pub gap: f64,
    /// Grid point attaining the gap.
    pub at: f64,
    /// `Pr_cube[P < t]` per grid point.
    pub cube_cdf: Vec<f64>,
    /// `Pr_gauss[P < t]` per grid point.
    pub gaussian_cdf: Vec<f64>,
    /// Simultaneous Hoeffding half-width of the Gaussian side.
    pub half_width: f64,
}

/// `max_t |Pr_cube[P < t] − Pr_gauss[P < t]|` for a normalized
/// `ε`-regular multilinear `P`. The cube side is exact.
pub fn invariance_gap<T: Scalar>(
    p: &Polynomial<T>,
    epsilon: f64,
    grid: &[f64],
    cfg: &McConfig,
) -> Result<InvarianceGap> {
    cfg.check()?;
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if !p.is_multilinear() {
        return Err(Error::NotMultilinear);
    }
    if !WeightProfile::new(p)?.is_regular(epsilon)? {
        return Err(Error::NotRegular { epsilon });
    }
    let q = normalize(p)?;
    let ts: Vec<T> = grid.iter().map(|&t| T::from_f64_lossy(t)).collect();
    let values = cube_values(&q)?;
    let size = values.len() as f64;
    let cube_cdf: Vec<f64> =
        ts.iter().map(|&t| values.iter().filter(|&&v| v < t).count() as f64 / size).collect();
    let n = q.n();
    let c = CompiledPolynomial::new(&q);
    let streams = Streams::new(cfg.seed);
    let counts = sum_vectors(&streams, cfg.samples, ts.len(), |rng, out| {
        let mut x = vec![T::zero(); n];
        fill_normals(rng, &mut x);
        let v = c.evaluate(&x);
        for (o, &t) in out.iter_mut().zip(&ts) {
            *o = if v < t { 1.0 } else { 0.0 };
        }
    });
    let m = cfg.samples as f64;
    let gaussian_cdf: Vec<f64> = counts.iter().map(|c| c / m).collect();
    let (idx, gap) = cube_cdf
        .iter()
        .zip(&gaussian_cdf)
        .map(|(c, g)| (c - g).abs())
        .enumerate()
        .fold((0, -1.0), |best, (i, d)| if d > best.1 { (i, d) } else { best });
    // Union bound over the grid.
    let per_point = 1.0 - (1.0 - cfg.confidence) / grid.len() as f64;
    Ok(InvarianceGap {
        gap,
        at: grid[idx],
        cube_cdf,
        gaussian_cdf,
        half_width: Estimate::hoeffding_half_width(cfg.samples, per_point),
    })
}
