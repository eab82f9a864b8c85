//! Low-degree polynomial regression learner for PTFs over the uniform
//! hypercube: least-squares fit on all multilinear monomials of degree
//! `<= D`, then the best empirical threshold.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::hypercube::{cube_values, point, walsh_hadamard, TruthTable};
use crate::limits::exact_limit;
use crate::poly::{sign, CompiledPtf, Monomial, Polynomial, Ptf};
use crate::rng::{fill_signs, Streams};
use crate::scalar::Scalar;

/// Largest `n` for which the Gram matrix is built through the cube.
pub const GRAM_CUBE_LIMIT: usize = 20;
/// Relative eigenvalue cutoff of the minimum-norm solve.
pub const PIVOT_TOLERANCE: f64 = 1e-10;

/// Labeled points `x ∈ {±1}^n`, `y ∈ {±1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSample {
    n: usize,
    points: Vec<Vec<i8>>,
    labels: Vec<i8>,
    /// Target, noise process and seed the sample came from.
    pub source: String,
}

fn check_signs(v: &[i8], what: &str) -> Result<()> {
    if v.iter().any(|&s| s != 1 && s != -1) {
        return Err(invalid(format!("{what} must be ±1")));
    }
    Ok(())
}

impl LabeledSample {
    pub fn new(n: usize, points: Vec<Vec<i8>>, labels: Vec<i8>, source: impl Into<String>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: labels.len() });
        }
        for p in &points {
            if p.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.len() });
            }
            check_signs(p, "coordinates")?;
        }
        check_signs(&labels, "labels")?;
        Ok(Self { n, points, labels, source: source.into() })
    }

    /// `m` uniform points labeled by `f`, each label flipped independently
    /// with probability `noise`.
    pub fn from_target<T: Scalar>(f: &Ptf<T>, noise: f64, m: usize, seed: u64) -> Result<Self> {
        if !(0.0..0.5).contains(&noise) {
            return Err(invalid(format!("noise rate {noise} not in [0, 1/2)")));
        }
        let n = f.n();
        let c = CompiledPtf::new(f);
        let streams = Streams::new(seed);
        let rows: Vec<(Vec<i8>, i8)> = (0..m as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = streams.stream(i);
                let mut x = vec![T::zero(); n];
                fill_signs(&mut rng, &mut x);
                let mut y = c.evaluate(&x);
                if rng.random::<f64>() < noise {
                    y = -y;
                }
                (x.iter().map(|&v| if v > T::zero() { 1 } else { -1 }).collect(), y)
            })
            .collect();
        let (points, labels) = rows.into_iter().unzip();
        Ok(Self { n, points, labels, source: format!("target n={n} d={} noise={noise} seed={seed}", f.degree()) })
    }

    /// Every cube point once, labeled by `f` without noise.
    pub fn full_cube<T: Scalar>(f: &Ptf<T>) -> Result<Self> {
        let t = TruthTable::from_ptf(f)?;
        let n = f.n();
        let points = (0..1usize << n).map(|i| point::<f64>(n, i).iter().map(|&v| v as i8).collect()).collect();
        Ok(Self { n, points, labels: t.signs().to_vec(), source: format!("full cube n={n} d={}", f.degree()) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn points(&self) -> &[Vec<i8>] {
        &self.points
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    fn index(&self, j: usize) -> usize {
        self.points[j].iter().enumerate().fold(0, |acc, (b, &v)| if v > 0 { acc | 1 << b } else { acc })
    }
}

/// `h(x) = sign(p(x) − t*)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    pub poly: Polynomial<f64>,
    pub threshold: f64,
    pub degree: usize,
}

impl Hypothesis {
    pub fn predict(&self, x: &[i8]) -> i8 {
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        sign(self.poly.evaluate_unchecked(&xf) - self.threshold)
    }

    pub fn as_ptf(&self) -> Ptf<f64> {
        Ptf::new(self.poly.clone(), self.threshold)
    }
}

/// `D = ceil(1/δ*)` with `δ* = (ε²/(4A))^{4d+6}`, at least 1; saturates at
/// `u64::MAX`.
pub fn degree_for_accuracy(d: usize, epsilon: f64, a: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(invalid(format!("accuracy {epsilon} not in (0,1]")));
    }
    if d == 0 {
        return Err(invalid("degree must be >= 1"));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid(format!("constant A = {a} must be positive")));
    }
    let log_delta = (4 * d + 6) as f64 * (epsilon * epsilon / (4.0 * a)).ln();
    let inv = (-log_delta).exp();
    let deg = inv.ceil();
    Ok(if deg < 1.0 { 1 } else { deg as u64 })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitConfig {
    /// Maximum number of regression columns.
    pub max_columns: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { max_columns: 4096 }
    }
}

/// All subsets of `0..n` of size `<= d`, by size then lexicographically.
fn monomials(n: usize, d: usize, budget: usize) -> Result<Vec<Vec<usize>>> {
    let mut count: u128 = 0;
    let mut binom: u128 = 1;
    for k in 0..=d.min(n) {
        if k > 0 {
            binom = binom * (n - k + 1) as u128 / k as u128;
        }
        count += binom;
    }
    if count > budget as u128 {
        return Err(Error::Budget(format!("{count} regression columns exceed {budget}")));
    }
    let mut out = Vec::with_capacity(count as usize);
    for k in 0..=d.min(n) {
        crate::poly::for_each_subset(n, k, |s| out.push(s.to_vec()));
    }
    Ok(out)
}

fn mask(set: &[usize]) -> usize {
    set.iter().fold(0, |m, &i| m | 1 << i)
}

/// `(ΦᵀΦ, Φᵀy)` through Walsh–Hadamard transforms of per-point counts.
fn gram_cube(sample: &LabeledSample, cols: &[Vec<usize>]) -> (DMatrix<f64>, DVector<f64>) {
    let size = 1usize << sample.n;
    let mut counts = vec![0.0; size];
    let mut label_sums = vec![0.0; size];
    for j in 0..sample.len() {
        let i = sample.index(j);
        counts[i] += 1.0;
        label_sums[i] += sample.labels[j] as f64;
    }
    walsh_hadamard(&mut counts);
    walsh_hadamard(&mut label_sums);
    // Σ_x c[x] χ_S(x) = (−1)^{|S|} WHT(c)[S] since χ_S(x) = (−1)^{|S \ x|}.
    let chi = |v: &[f64], s: usize| if s.count_ones().is_multiple_of(2) { v[s] } else { -v[s] };
    let masks: Vec<usize> = cols.iter().map(|s| mask(s)).collect();
    let k = cols.len();
    let g = DMatrix::from_fn(k, k, |a, b| chi(&counts, masks[a] ^ masks[b]));
    let rhs = DVector::from_fn(k, |a, _| chi(&label_sums, masks[a]));
    (g, rhs)
}

fn feature_row(x: &[i8], cols: &[Vec<usize>], out: &mut [f64]) {
    for (o, s) in out.iter_mut().zip(cols) {
        *o = s.iter().fold(1.0, |acc, &i| acc * x[i] as f64);
    }
}

/// Row-by-row accumulation in fixed chunks, combined in chunk order.
fn gram_rows(sample: &LabeledSample, cols: &[Vec<usize>]) -> (DMatrix<f64>, DVector<f64>) {
    let k = cols.len();
    let chunk = 1024;
    let parts: Vec<(DMatrix<f64>, DVector<f64>)> = (0..sample.len().div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut g = DMatrix::zeros(k, k);
            let mut rhs = DVector::zeros(k);
            let mut row = vec![0.0; k];
            for j in c * chunk..((c + 1) * chunk).min(sample.len()) {
                feature_row(&sample.points[j], cols, &mut row);
                let y = sample.labels[j] as f64;
                for a in 0..k {
                    rhs[a] += row[a] * y;
                    for b in a..k {
                        g[(a, b)] += row[a] * row[b];
                    }
                }
            }
            (g, rhs)
        })
        .collect();
    let mut g = DMatrix::zeros(k, k);
    let mut rhs = DVector::zeros(k);
    for (pg, pr) in parts {
        g += pg;
        rhs += pr;
    }
    for a in 0..k {
        for b in 0..a {
            g[(a, b)] = g[(b, a)];
        }
    }
    (g, rhs)
}

/// Minimum-norm solution of `G β = r` for symmetric positive semidefinite `G`.
fn min_norm_solve(g: DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let eig = SymmetricEigen::new(g);
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let mut beta = DVector::zeros(rhs.len());
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > PIVOT_TOLERANCE * top {
            let v = eig.eigenvectors.column(i);
            beta += v * (v.dot(rhs) / lambda);
        }
    }
    beta
}

/// Threshold minimizing the empirical error of `sign(p − t)` over
/// midpoints of consecutive distinct predictions and `±∞`; the smallest
/// such threshold on ties.
fn best_threshold(pred: &[f64], labels: &[i8]) -> f64 {
    let mut order: Vec<usize> = (0..pred.len()).collect();
    order.sort_by(|&a, &b| pred[a].partial_cmp(&pred[b]).expect("finite predictions"));
    // t = −∞: everything is +1.
    let mut errors: i64 = labels.iter().filter(|&&y| y < 0).count() as i64;
    let mut best = (errors, f64::NEG_INFINITY);
    let mut k = 0;
    while k < order.len() {
        let v = pred[order[k]];
        // Move every point with this prediction to the −1 side.
        while k < order.len() && pred[order[k]] == v {
            errors += if labels[order[k]] > 0 { 1 } else { -1 };
            k += 1;
        }
        let t = if k < order.len() { 0.5 * (v + pred[order[k]]) } else { f64::INFINITY };
        if errors < best.0 {
            best = (errors, t);
        }
    }
    best.1
}

/// Least-squares regression on degree `<= D` monomials, then the best
/// empirical threshold. Rank-deficient systems take the minimum-norm
/// solution.
pub fn fit(sample: &LabeledSample, degree: usize, cfg: &FitConfig) -> Result<Hypothesis> {
    if sample.is_empty() {
        return Err(invalid("empty sample"));
    }
    let n = sample.n;
    let cols = monomials(n, degree, cfg.max_columns)?;
    let (g, rhs) = if n <= GRAM_CUBE_LIMIT && n <= exact_limit() {
        gram_cube(sample, &cols)
    } else {
        gram_rows(sample, &cols)
    };
    let beta = min_norm_solve(g, &rhs);
    let mut poly = Polynomial::zero(n);
    for (s, &b) in cols.iter().zip(beta.iter()) {
        if b != 0.0 {
            poly.add_term(Monomial::from_set(s.iter().copied()), b)?;
        }
    }
    let pred = predictions(&poly, sample);
    let threshold = best_threshold(&pred, &sample.labels);
    Ok(Hypothesis { poly, threshold, degree })
}

fn predictions(p: &Polynomial<f64>, sample: &LabeledSample) -> Vec<f64> {
    sample
        .points
        .par_iter()
        .map(|x| {
            let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
            p.evaluate_unchecked(&xf)
        })
        .collect()
}

/// Mean of `(p(x) − y)²` over the sample.
pub fn squared_loss(p: &Polynomial<f64>, sample: &LabeledSample) -> f64 {
    let pred = predictions(p, sample);
    pred.iter().zip(&sample.labels).map(|(v, &y)| (v - y as f64).powi(2)).sum::<f64>() / sample.len() as f64
}

/// Error of a hypothesis, with the benchmark `opt` when it is known.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnOutcome {
    pub error: f64,
    pub opt: Option<f64>,
    pub excess: Option<f64>,
}

/// Misclassification frequency on a sample.
pub fn evaluate(h: &Hypothesis, sample: &LabeledSample) -> Result<LearnOutcome> {
    if h.poly.n() != sample.n {
        return Err(Error::DimensionMismatch { expected: h.poly.n(), got: sample.n });
    }
    if sample.is_empty() {
        return Err(invalid("empty sample"));
    }
    let wrong = sample.points.iter().zip(&sample.labels).filter(|(x, &y)| h.predict(x) != y).count();
    Ok(LearnOutcome { error: wrong as f64 / sample.len() as f64, opt: None, excess: None })
}

/// Exact error against labels `f(x)` flipped with probability `noise`:
/// `η + (1 − 2η) Pr[h ≠ f]`. The generator attains `η`, reported as `opt`.
pub fn evaluate_exact<T: Scalar>(h: &Hypothesis, f: &Ptf<T>, noise: f64) -> Result<LearnOutcome> {
    if h.poly.n() != f.n() {
        return Err(Error::DimensionMismatch { expected: h.poly.n(), got: f.n() });
    }
    if !(0.0..0.5).contains(&noise) {
        return Err(invalid(format!("noise rate {noise} not in [0, 1/2)")));
    }
    let target = TruthTable::from_ptf(f)?;
    let values = cube_values(&h.poly)?;
    let disagree = values
        .iter()
        .zip(target.signs())
        .filter(|(&v, &y)| sign(v - h.threshold) != y)
        .count() as f64
        / values.len() as f64;
    let error = noise + (1.0 - 2.0 * noise) * disagree;
    Ok(LearnOutcome { error, opt: Some(noise), excess: Some(error - noise) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{random_ptf, CoefficientModel};

    #[test]
    fn degree_formula() {
        assert_eq!(degree_for_accuracy(1, 1.0, 1.0).unwrap(), 1 << 20);
        assert_eq!(degree_for_accuracy(1, 1.0, 0.2).unwrap(), 1);
        let grid: Vec<u64> = [0.6, 0.7, 0.8, 0.9, 1.0].iter().map(|&e| degree_for_accuracy(1, e, 1.0).unwrap()).collect();
        assert!(grid.windows(2).all(|w| w[0] >= w[1]));
        assert!(degree_for_accuracy(1, 0.0, 1.0).is_err());
        assert!(degree_for_accuracy(1, 1.5, 1.0).is_err());
        assert_eq!(degree_for_accuracy(3, 0.01, 1.0).unwrap(), u64::MAX);
    }

    #[test]
    fn realizable_dictator() {
        let f = Ptf::<f64>::dictator(4, 0);
        let s = LabeledSample::full_cube(&f).unwrap();
        let h = fit(&s, 1, &FitConfig::default()).unwrap();
        assert_eq!(evaluate(&h, &s).unwrap().error, 0.0);
    }

    #[test]
    fn parity_needs_degree_two() {
        let mut p = Polynomial::zero(3);
        p.add_term(Monomial::from_set([0, 1]), 1.0).unwrap();
        let f = Ptf::new(p, 0.0);
        let s = LabeledSample::full_cube(&f).unwrap();
        let h2 = fit(&s, 2, &FitConfig::default()).unwrap();
        assert_eq!(evaluate(&h2, &s).unwrap().error, 0.0);
        let h1 = fit(&s, 1, &FitConfig::default()).unwrap();
        assert_eq!(evaluate(&h1, &s).unwrap().error, 0.5);
    }

    #[test]
    fn both_gram_paths_agree() {
        let f = random_ptf::<f64>(6, 2, CoefficientModel::UnitGaussian, 9).unwrap();
        let s = LabeledSample::from_target(&f, 0.1, 500, 3).unwrap();
        let cols = monomials(6, 2, 1000).unwrap();
        let (g1, r1) = gram_cube(&s, &cols);
        let (g2, r2) = gram_rows(&s, &cols);
        assert!((g1 - g2).abs().max() < 1e-9);
        assert!((r1 - r2).abs().max() < 1e-9);
    }

    #[test]
    fn threshold_search() {
        let pred = [0.1, 0.5, 0.9, 0.5];
        assert_eq!(best_threshold(&pred, &[-1, 1, 1, 1]), 0.3);
        assert_eq!(best_threshold(&pred, &[1, 1, 1, 1]), f64::NEG_INFINITY);
        assert_eq!(best_threshold(&pred, &[-1, -1, -1, -1]), f64::INFINITY);
    }

    #[test]
    fn generator_has_noise_rate_error() {
        let f = random_ptf::<f64>(8, 2, CoefficientModel::UnitGaussian, 2).unwrap();
        let h = Hypothesis { poly: f.poly.clone(), threshold: 0.0, degree: 2 };
        let out = evaluate_exact(&h, &f, 0.05).unwrap();
        assert_eq!(out.error, 0.05);
        assert_eq!(out.excess, Some(0.0));
        let s = LabeledSample::from_target(&f, 0.05, 20000, 1).unwrap();
        let e = evaluate(&h, &s).unwrap().error;
        assert!((e - 0.05).abs() < 0.01);
    }

    #[test]
    fn constant_hypothesis_on_balanced_labels() {
        let f = Ptf::<f64>::dictator(5, 2);
        let s = LabeledSample::full_cube(&f).unwrap();
        let h = Hypothesis { poly: Polynomial::constant(5, 1.0), threshold: 0.0, degree: 0 };
        assert_eq!(evaluate(&h, &s).unwrap().error, 0.5);
    }

    #[test]
    fn least_squares_beats_scaled_generator() {
        let f = random_ptf::<f64>(8, 2, CoefficientModel::UnitGaussian, 5).unwrap();
        let s = LabeledSample::from_target(&f, 0.05, 3000, 8).unwrap();
        let h = fit(&s, 2, &FitConfig::default()).unwrap();
        let pred = predictions(&f.poly, &s);
        let num: f64 = pred.iter().zip(s.labels()).map(|(p, &y)| p * y as f64).sum();
        let den: f64 = pred.iter().map(|p| p * p).sum();
        let scaled = f.poly.scale(num / den);
        assert!(squared_loss(&h.poly, &s) <= squared_loss(&scaled, &s) + 1e-12);
    }

    #[test]
    fn budget_and_validation() {
        let f = Ptf::<f64>::majority(30);
        let s = LabeledSample::from_target(&f, 0.0, 10, 0).unwrap();
        assert!(matches!(fit(&s, 4, &FitConfig::default()), Err(Error::Budget(_))));
        assert!(LabeledSample::new(2, vec![vec![1, 0]], vec![1], "").is_err());
        assert!(LabeledSample::new(2, vec![vec![1, 1]], vec![1, 1], "").is_err());
    }
}
