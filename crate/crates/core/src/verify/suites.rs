//! Named suites: exhaustive small instances and seeded random ensembles.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};
use rayon::prelude::*;

use super::checks::{
    block_tightness_instance, check_actons, check_combas, check_hypercontractivity, check_mainlmc,
    check_nstoas, check_poly_lower_bounds,
};
use super::drift::{drift_check, log_log_slope, ConstantPoint, DRIFT_FACTOR};
use super::report::{CheckReport, Status};
use crate::error::{invalid, Result};
use crate::estimate::Measured;
use crate::gaussian::{
    anticoncentration, gns_mc, hermite_multi, hermite_taylor, invariance_gap, perturbation_norm_sq,
    perturbation_norm_sq_mc, Measure,
};
use crate::hypercube::{
    average_sensitivity_exact, ns_exact_direct, ns_exact_spectral, ns_mc, sensitivity_fourier, McConfig,
    TruthTable,
};
use crate::learn::{evaluate, evaluate_exact, fit, squared_loss, FitConfig, LabeledSample};
use crate::poly::{random_polynomial, random_ptf, CoefficientModel, Monomial, Polynomial, Ptf, Restriction};
use crate::rng::{fill_normals, splitmix64, sum_vectors, Streams};
use crate::structure::{
    compact, decompose, restriction_experiment, Classification, DecomposeConfig, Evaluation, ExperimentConfig,
    ExperimentMode, StructureConstants, WeightProfile,
};

/// Every suite name accepted by [`run_suite`], in the order `all` runs them.
pub const SUITES: &[&str] = &[
    "oracle",
    "combas",
    "mainlmc",
    "tightness",
    "nstoas",
    "hypercon",
    "problm",
    "simple1",
    "case1",
    "case2",
    "mainlmns",
    "hermite",
    "smallq",
    "gns",
    "cw",
    "invariance",
    "regac",
    "nsregular",
    "bns",
    "as",
    "actons",
    "realizable",
    "agnostic",
];

/// Shared knobs; `trials` and `samples` override each suite's defaults.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Number of random instances per ensemble.
    pub trials: Option<usize>,
    /// Monte Carlo samples per estimate.
    pub samples: Option<u64>,
    pub confidence: f64,
    pub drift_factor: f64,
    pub constants: StructureConstants,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            trials: None,
            samples: None,
            confidence: 0.99,
            drift_factor: DRIFT_FACTOR,
            constants: StructureConstants::default(),
        }
    }
}

impl SuiteOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    fn trials(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    fn samples(&self, default: u64) -> u64 {
        self.samples.unwrap_or(default)
    }

    fn mc(&self, default: u64, seed: u64) -> McConfig {
        McConfig::new(self.samples(default), self.confidence, seed)
    }
}

/// Runs one suite by name, or every suite for `"all"`.
pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    if name == "all" {
        let mut out = Vec::new();
        for s in SUITES {
            out.extend(run_suite(s, opts)?);
        }
        return Ok(out);
    }
    match name {
        "oracle" => oracle(opts),
        "combas" => combas(opts),
        "mainlmc" => mainlmc(opts),
        "tightness" => tightness(opts),
        "nstoas" => nstoas(opts),
        "hypercon" => hypercon(opts),
        "problm" | "polylb1" => problm(opts),
        "simple1" => simple1(opts),
        "case1" => case1(opts),
        "case2" => case2(opts),
        "mainlmns" => mainlmns(opts),
        "hermite" => hermite(opts),
        "smallq" => smallq(opts),
        "gns" => gns(opts),
        "cw" => cw(opts),
        "invariance" => invariance(opts),
        "regac" => regac(opts),
        "nsregular" => nsregular(opts),
        "bns" => bns(opts),
        "as" => as_bound(opts),
        "actons" => actons(opts),
        "realizable" => realizable(opts),
        "agnostic" => agnostic(opts),
        other => Err(invalid(format!("unknown suite '{other}'"))),
    }
}

const MODELS: [CoefficientModel; 4] = [
    CoefficientModel::UnitGaussian,
    CoefficientModel::SignedUnit,
    CoefficientModel::MajorityLike,
    CoefficientModel::BlockStructured,
];

fn suite_tag(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

/// Deterministic per-instance generator keyed by `(seed, suite, index)`.
fn instance_rng(opts: &SuiteOptions, suite: &str, index: usize) -> ChaCha8Rng {
    Streams::with_domain(opts.seed, suite_tag(suite)).stream(index as u64)
}

/// A random multilinear polynomial with its descriptor and seed.
struct Instance {
    poly: Polynomial<f64>,
    desc: String,
    seed: u64,
}

impl Instance {
    fn random(rng: &mut ChaCha8Rng, n_lo: usize, n_hi: usize, d_max: usize) -> Result<Self> {
        let n = rng.random_range(n_lo..=n_hi);
        let d = rng.random_range(1..=d_max.min(n));
        let model = MODELS[rng.random_range(0..MODELS.len())];
        Self::with(n, d, model, rng.next_u64())
    }

    fn with(n: usize, d: usize, model: CoefficientModel, seed: u64) -> Result<Self> {
        let poly = random_polynomial::<f64>(n, d, model, seed)?;
        Ok(Self { poly, desc: format!("n={n} d={d} model={}", model.name()), seed })
    }

    fn ptf(&self) -> Ptf<f64> {
        Ptf::new(self.poly.clone(), 0.0)
    }
}

fn tagged(mut r: CheckReport, suite: &str, desc: &str, seed: u64) -> CheckReport {
    r.suite = suite.to_string();
    r.instance = desc.to_string();
    r.seed = seed;
    r
}

/// Parallel map over instance indices; results stay in index order.
fn ensemble(count: usize, job: impl Fn(usize) -> Result<Vec<CheckReport>> + Sync + Send) -> Result<Vec<CheckReport>> {
    let parts: Vec<Vec<CheckReport>> = (0..count).into_par_iter().map(job).collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

fn oracle(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    ensemble(opts.trials(300), |i| {
        let inst = Instance::random(&mut instance_rng(opts, "oracle", i), 1, 10, 3)?;
        let t = TruthTable::from_ptf(&inst.ptf())?;
        let spectrum = t.fourier_transform();
        let (as_fourier, _) = sensitivity_fourier(&spectrum)?;
        let mut diff = (as_fourier - average_sensitivity_exact(&t)).abs();
        for delta in [0.05, 0.2, 0.5] {
            diff = diff.max((ns_exact_spectral(&spectrum, delta)? - ns_exact_direct(&t, delta)?).abs());
        }
        Ok(vec![CheckReport::exact("oracle", inst.desc, diff, 1e-9, diff, inst.seed)])
    })
}

fn combas(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let per_degree = opts.trials(500);
    let mut out = ensemble(3 * per_degree, |i| {
        let d = 1 + i / per_degree;
        let mut rng = instance_rng(opts, "combas", i);
        let n = rng.random_range(d..=14);
        let model = MODELS[rng.random_range(0..MODELS.len())];
        let inst = Instance::with(n, d, model, rng.next_u64())?;
        let r = check_combas(&inst.ptf())?;
        Ok(vec![tagged(r, "combas", &inst.desc, inst.seed)])
    })?;
    for n in (1..=15).step_by(2) {
        let r = check_combas(&Ptf::<f64>::majority(n))?;
        out.push(tagged(r, "combas", &format!("maj{n}"), 0));
    }
    Ok(out)
}

fn random_ltf_tuple(rng: &mut ChaCha8Rng, n: usize) -> Vec<Ptf<f64>> {
    (0..n)
        .map(|i| {
            let w: Vec<f64> = (0..n).map(|j| if j == i { 0.0 } else { rng.sample(StandardNormal) }).collect();
            let theta: f64 = 0.5 * rng.sample::<f64, _>(StandardNormal);
            Ptf::new(Polynomial::linear(&w), theta)
        })
        .collect()
}

fn mainlmc(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    ensemble(opts.trials(200), |i| {
        let mut rng = instance_rng(opts, "mainlmc", i);
        let n = rng.random_range(2..=12);
        let seed = rng.next_u64();
        let fs = random_ltf_tuple(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let r = check_mainlmc(&fs)?;
        Ok(vec![tagged(r, "mainlmc", &format!("ltf-tuple n={n}"), seed)])
    })
}

fn tightness(_opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for n in [4usize, 9, 16] {
        let fs = block_tightness_instance(n)?;
        let r = check_mainlmc(&fs)?;
        let desc = format!("blocks n={n}");
        let ratio = r.lhs / r.rhs;
        out.push(tagged(r, "tightness", &desc, 0));
        // Floor check: the ratio must exceed 1/4.
        out.push(CheckReport::new(
            "tightness",
            format!("{desc} ratio"),
            0.25,
            ratio,
            ratio,
            Status::from_bool(ratio > 0.25),
            0,
        ));
    }
    Ok(out)
}

fn nstoas(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    ensemble(opts.trials(200), |i| {
        let inst = Instance::random(&mut instance_rng(opts, "nstoas", i), 1, 10, 3)?;
        let r = check_nstoas(&inst.ptf())?;
        Ok(vec![tagged(r, "nstoas", &inst.desc, inst.seed)])
    })
}

fn hypercon(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    ensemble(opts.trials(500), |i| {
        let mut rng = instance_rng(opts, "hypercon", i);
        let n = rng.random_range(1..=12);
        let dq = rng.random_range(1..=4usize.min(n));
        let dr = rng.random_range(1..=4usize.min(n));
        let q = Instance::with(n, dq, MODELS[rng.random_range(0..4)], rng.next_u64())?;
        let r = Instance::with(n, dr, MODELS[rng.random_range(0..4)], rng.next_u64())?;
        let rep = check_hypercontractivity(&q.poly, &r.poly)?;
        let desc = format!("Q: {} R: {}", q.desc, r.desc);
        Ok(vec![tagged(rep, "hypercon", &desc, q.seed)])
    })
}

fn problm(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    ensemble(opts.trials(500), |i| {
        let inst = Instance::random(&mut instance_rng(opts, "problm", i), 1, 12, 3)?;
        let (a, b) = check_poly_lower_bounds(&inst.poly)?;
        let suffix = |r: &CheckReport| {
            if r.instance.ends_with("zero-variance") {
                format!("{} zero-variance", inst.desc)
            } else {
                inst.desc.clone()
            }
        };
        let (da, db) = (suffix(&a), suffix(&b));
        Ok(vec![tagged(a, "problm", &da, inst.seed), tagged(b, "polylb1", &db, inst.seed)])
    })
}

const SIMPLE1_GRID: [f64; 6] = [0.1, 0.2, 0.3, 0.5, 0.7, 0.9];

/// Critical index by a direct scan of the definition.
fn critical_index_scan(w_sq: &[f64], epsilon: f64) -> usize {
    let mut sorted = w_sq.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite weights"));
    let e2 = epsilon * epsilon;
    (0..sorted.len())
        .find(|&i| {
            let tail: f64 = sorted[i..].iter().sum();
            sorted[i..].iter().all(|&w| w <= e2 * tail)
        })
        .unwrap_or(sorted.len())
}

fn simple1(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    ensemble(opts.trials(500), |i| {
        let inst = Instance::random(&mut instance_rng(opts, "simple1", i), 1, 16, 3)?;
        let profile = WeightProfile::new(&inst.poly)?;
        let mut violations = 0usize;
        for eps in SIMPLE1_GRID {
            if !profile.sigma_decay_check(eps)? {
                violations += 1;
            }
            if profile.critical_index(eps)? != critical_index_scan(&profile.w_sq, eps) {
                violations += 1;
            }
        }
        let v = violations as f64;
        Ok(vec![CheckReport::exact("simple1", inst.desc, v, 0.0, v, inst.seed)])
    })
}

/// `lower >= floor` passes, `value >= floor` alone is inconclusive.
fn floor_report(suite: &str, desc: String, floor: f64, p: &Measured, seed: u64) -> CheckReport {
    let status = if p.lower() >= floor {
        Status::Pass
    } else if p.value() >= floor {
        Status::Inconclusive
    } else {
        Status::Fail
    };
    CheckReport::new(suite, desc, floor, p.value(), p.value(), status, seed)
}

const EXPERIMENT_FLOOR: f64 = 0.02;

fn experiment_config(opts: &SuiteOptions, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        trials: 2000,
        confidence: opts.confidence,
        seed,
        constants: opts.constants,
        evaluation: Evaluation::auto(McConfig::new(opts.samples(4000), opts.confidence, seed)),
    }
}

fn case1(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let eps = 0.3;
    ensemble(opts.trials(20), |i| {
        let mut rng = instance_rng(opts, "case1", i);
        // A tail of at least 16 near-equal coordinates keeps Σw⁴/(Σw²)²
        // well below ε² = 0.09.
        let n = rng.random_range(20..=24);
        let heads = rng.random_range(1..=4);
        let seed = rng.next_u64();
        let f = Ptf::new(head_heavy_polynomial(n, 2, CoefficientModel::MajorityLike, heads, 3.0, seed)?, 0.0);
        let res = restriction_experiment(&f, eps, ExperimentMode::Regularity, &experiment_config(opts, seed))?;
        let desc = format!("head-heavy majority-like n={n} d=2 heads={heads} scale=3 eps={eps} K={}", res.critical_index);
        Ok(vec![floor_report("case1", desc, EXPERIMENT_FLOOR, &res.probability, seed)])
    })
}

/// Random polynomial whose monomials touching the first `heads`
/// variables are scaled by `scale` per such variable.
pub fn head_heavy_polynomial(
    n: usize,
    d: usize,
    model: CoefficientModel,
    heads: usize,
    scale: f64,
    seed: u64,
) -> Result<Polynomial<f64>> {
    let base = random_polynomial::<f64>(n, d, model, seed)?;
    let terms = base.terms().iter().map(|(m, &c)| {
        let k = m.variables().filter(|&v| v < heads).count() as i32;
        (m.clone(), c * scale.powi(k))
    });
    Polynomial::from_terms(n, terms)
}

/// Degree-2 polynomial whose monomial `I` has scale `ratio^{Σ_{i∈I} i}`,
/// so coordinate weights decay geometrically with the index.
pub fn geometric_polynomial(n: usize, d: usize, ratio: f64, seed: u64) -> Result<Polynomial<f64>> {
    let base = random_polynomial::<f64>(n, d, CoefficientModel::UnitGaussian, seed)?;
    let terms = base.terms().iter().map(|(m, &c)| {
        let shift: i32 = m.variables().map(|v| v as i32).sum();
        (m.clone(), c * ratio.powi(shift))
    });
    Polynomial::from_terms(n, terms)
}

fn case2(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let eps = 0.3;
    ensemble(opts.trials(20), |i| {
        let seed = instance_rng(opts, "case2", i).next_u64();
        let n = 24;
        let p = geometric_polynomial(n, 2, 0.8, seed)?;
        let f = Ptf::new(p, 0.0);
        let desc = format!("geometric n={n} d=2 ratio=0.8 eps={eps}");
        let res = restriction_experiment(&f, eps, ExperimentMode::Determining, &experiment_config(opts, seed))?;
        let desc = format!("{desc} K={}", res.critical_index);
        Ok(vec![floor_report("case2", desc, EXPERIMENT_FLOOR, &res.probability, seed)])
    })
}

fn leaf_ptf(f: &Ptf<f64>, r: &Restriction) -> Result<Ptf<f64>> {
    let (q, _) = compact(&f.poly, r)?;
    Ok(Ptf::new(q, f.theta))
}

fn mainlmns(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let d = 2;
    // At ε = 0.25 and n <= 15 every critical index equals n; the ε = 0.5
    // instances give trees with regular leaves.
    let shapes = [(10usize, 0.25), (12, 0.25), (14, 0.25), (12, 0.5), (14, 0.5), (16, 0.5)];
    let count = opts.trials(12);
    ensemble(count, |i| {
        let mut rng = instance_rng(opts, "mainlmns", i);
        let (n, eps) = shapes[i % shapes.len()];
        let model = MODELS[rng.random_range(0..4)];
        let heads = rng.random_range(0..=2);
        let seed = rng.next_u64();
        let inst = Instance {
            poly: head_heavy_polynomial(n, d, model, heads, 3.0, seed)?,
            desc: format!("n={n} d={d} model={} heads={heads}", model.name()),
            seed,
        };
        let f = inst.ptf();
        let cfg = DecomposeConfig { constants: opts.constants, ..DecomposeConfig::default() };
        let tree = decompose(&f, eps, &cfg)?;
        let masses = tree.leaf_masses();
        let mut out = vec![CheckReport::summed(
            "mainlmns",
            format!("{} eps={eps} capped-mass nodes={}", inst.desc, tree.len()),
            masses.capped,
            eps,
            masses.capped / eps,
            inst.seed,
        )];
        // Noise sensitivity at regular leaves against Δ ε^{1/(2d+2)}.
        let bound = opts.constants.big_delta * eps.powf(1.0 / (2 * d + 2) as f64);
        let mut worst = 0.0f64;
        let mut checked = 0;
        for node in tree.nodes() {
            if checked == 8 {
                break;
            }
            if let Classification::Regular { .. } = node.classification {
                let g = leaf_ptf(&f, &node.restriction)?;
                if g.n() == 0 {
                    continue;
                }
                let t = TruthTable::from_ptf(&g)?;
                worst = worst.max(ns_exact_spectral(&t.fourier_transform(), eps)?);
                checked += 1;
            }
        }
        if checked > 0 {
            out.push(CheckReport::summed(
                "mainlmns",
                format!("{} eps={eps} regular-leaf-ns leaves={checked}", inst.desc),
                worst,
                bound,
                worst / eps.powf(1.0 / (2 * d + 2) as f64),
                inst.seed,
            ));
        }
        // Pr over the top M = min(K, L) coordinates that the restriction
        // has NS_ε at most Δ ε^{1/(2d+2)}; expected to be positive.
        let profile = WeightProfile::new(&f.poly)?;
        let m = profile.critical_index(eps)?.min(opts.constants.block_size(eps));
        let top = profile.top(m).to_vec();
        let total = 1usize << m;
        let mut good = 0usize;
        for bits in 0..total {
            let r = Restriction::from_pairs(
                top.iter().enumerate().map(|(k, &v)| (v, if (bits >> k) & 1 == 1 { 1 } else { -1 })),
            )?;
            let g = leaf_ptf(&f, &r)?;
            let ns = if g.n() == 0 { 0.0 } else { ns_exact_spectral(&TruthTable::from_ptf(&g)?.fourier_transform(), eps)? };
            if ns <= bound {
                good += 1;
            }
        }
        let fraction = good as f64 / total as f64;
        out.push(CheckReport::new(
            "mainlmns",
            format!("{} eps={eps} M={m} Pr[NS<=bound]", inst.desc),
            0.0,
            fraction,
            fraction,
            Status::from_bool(fraction > 0.0),
            inst.seed,
        ));
        Ok(out)
    })
}

fn multisets(n: usize, max_degree: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut powers = vec![0u32; n];
    loop {
        let total: u32 = powers.iter().sum();
        if total <= max_degree {
            let entries = powers.iter().enumerate().filter(|(_, &k)| k > 0).map(|(v, &k)| (v, k)).collect();
            out.push(Monomial::new(entries).expect("ascending variables"));
        }
        let mut i = 0;
        loop {
            if i == n {
                out.sort_by_key(|m| (m.degree(), m.clone()));
                return out;
            }
            powers[i] += 1;
            if powers[i] <= max_degree {
                break;
            }
            powers[i] = 0;
            i += 1;
        }
    }
}

/// Non-multilinear test polynomial: the product of two random multilinear ones.
fn product_polynomial(n: usize, seed: u64) -> Result<Polynomial<f64>> {
    let a = random_polynomial::<f64>(n, 2.min(n), CoefficientModel::UnitGaussian, seed)?;
    let b = random_polynomial::<f64>(n, 1, CoefficientModel::UnitGaussian, splitmix64(seed))?;
    Ok(&a * &b)
}

fn hermite(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    let seed = opts.seed;

    // Orthonormality: E[H_S H_T] = [S = T] for all |S|, |T| <= 4 over 4 variables.
    let basis = multisets(4, 4);
    let m = basis.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a..m).map(move |b| (a, b))).collect();
    let samples = opts.samples(1_000_000);
    let streams = Streams::with_domain(seed, suite_tag("hermite-orthonormality"));
    let sums = sum_vectors(&streams, samples, 2 * pairs.len(), |rng, buf| {
        let mut x = [0.0f64; 4];
        fill_normals(rng, &mut x);
        let h: Vec<f64> = basis.iter().map(|s| hermite_multi(s, &x)).collect();
        for (k, &(a, b)) in pairs.iter().enumerate() {
            let v = h[a] * h[b];
            buf[2 * k] = v;
            buf[2 * k + 1] = v * v;
        }
    });
    let z = normal_quantile(opts.confidence);
    let mf = samples as f64;
    let (mut worst_dev, mut worst_upper, mut worst_lower, mut worst_z) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (k, &(a, b)) in pairs.iter().enumerate() {
        let mean = sums[2 * k] / mf;
        let var = (sums[2 * k + 1] / mf - mean * mean).max(0.0) * mf / (mf - 1.0);
        let se = (var / mf).sqrt();
        let dev = (mean - if a == b { 1.0 } else { 0.0 }).abs();
        worst_dev = worst_dev.max(dev);
        worst_upper = worst_upper.max(dev + z * se);
        worst_lower = worst_lower.max(dev - z * se);
        if se > 0.0 {
            worst_z = worst_z.max(dev / se);
        }
    }
    let tol = 0.01;
    let status = if worst_upper <= tol {
        Status::Pass
    } else if worst_lower <= tol {
        Status::Inconclusive
    } else {
        Status::Fail
    };
    out.push(CheckReport::new(
        "hermite",
        format!("orthonormality n=4 |S|<=4 pairs={} samples={samples}", pairs.len()),
        worst_dev,
        tol,
        worst_upper,
        status,
        seed,
    ));
    // Same data, judged by each pair's own standard error.
    out.push(CheckReport::exact(
        "hermite",
        format!("orthonormality-zscore n=4 |S|<=4 samples={samples}"),
        worst_z,
        5.0,
        worst_z,
        seed,
    ));

    // Taylor expansion about x evaluated at z.
    let mut rng = instance_rng(opts, "hermite-taylor", 0);
    let taylor_basis = multisets(3, 4);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let mut x = [0.0f64; 3];
        let mut zz = [0.0f64; 3];
        fill_normals(&mut rng, &mut x);
        fill_normals(&mut rng, &mut zz);
        let s = &taylor_basis[rng.random_range(0..taylor_basis.len())];
        worst = worst.max((hermite_taylor(s, &x, &zz) - hermite_multi(s, &zz)).abs());
    }
    out.push(CheckReport::exact("hermite", "taylor n=3 |S|<=4 points=200", worst, 1e-8, worst, seed));

    // Closed-form perturbation norm against Monte Carlo, 3 standard errors.
    let pert = ensemble(20, |i| {
        let mut rng = instance_rng(opts, "hermite-perturbation", i);
        let n = rng.random_range(2..=5);
        let pseed = rng.next_u64();
        let (p, desc) = if i % 2 == 0 {
            let d = rng.random_range(1..=3usize.min(n));
            (random_polynomial::<f64>(n, d, CoefficientModel::UnitGaussian, pseed)?, format!("multilinear n={n} d={d}"))
        } else {
            (product_polynomial(n, pseed)?, format!("product n={n} d=3"))
        };
        let delta = [0.01, 0.05, 0.2][i % 3];
        let exact = perturbation_norm_sq(&p, delta)?;
        let est = perturbation_norm_sq_mc(&p, delta, opts.samples(200_000), pseed)?;
        let diff = (est.mean - exact).abs();
        Ok(vec![CheckReport::exact(
            "hermite",
            format!("perturbation {desc} delta={delta}"),
            diff,
            3.0 * est.std_error,
            if est.std_error > 0.0 { diff / est.std_error } else { 0.0 },
            pseed,
        )])
    })?;
    out.extend(pert);
    Ok(out)
}

/// Two-sided standard normal quantile for the given coverage.
fn normal_quantile(confidence: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0)
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    // Descending from hi to lo: toward the small-parameter limit.
    let (a, b) = (hi.ln(), lo.ln());
    (0..points).map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp()).collect()
}

fn drift_report(suite: &str, desc: String, points: &[ConstantPoint], factor: f64, seed: u64) -> Result<CheckReport> {
    let r = drift_check(points, factor)?;
    Ok(CheckReport::new(suite, desc, r.worst_tail, factor * r.median, r.median, r.status, seed))
}

fn slope_report(suite: &str, desc: String, slope: f64, target: f64, tol: f64, seed: u64) -> CheckReport {
    let dev = (slope - target).abs();
    CheckReport::exact(suite, format!("{desc} slope={slope:.4}"), dev, tol, slope, seed)
}

fn smallq(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let grid = log_grid(1e-4, 1e-1, 7);
    let mut out = Vec::new();
    for (i, (n, d)) in [(4usize, 1usize), (6, 2), (6, 3), (8, 2)].into_iter().enumerate() {
        let seed = instance_rng(opts, "smallq", i).next_u64();
        let p = random_polynomial::<f64>(n, d, CoefficientModel::UnitGaussian, seed)?;
        let p = p.scale(1.0 / p.norm_sq()?.sqrt());
        let pts: Vec<(f64, f64)> =
            grid.iter().map(|&delta| Ok((delta, perturbation_norm_sq(&p, delta)?.sqrt()))).collect::<Result<_>>()?;
        let slope = log_log_slope(&pts)?;
        out.push(slope_report("smallq", format!("normalized n={n} d={d} delta=1e-4..1e-1"), slope, 0.5, 0.05, seed));
    }
    Ok(out)
}

/// `sign(x0² + x1² − 1)` on two Gaussian coordinates.
pub fn ellipsoid() -> Ptf<f64> {
    let p = Polynomial::from_terms(
        2,
        [(Monomial::new(vec![(0, 2)]).expect("valid"), 1.0), (Monomial::new(vec![(1, 2)]).expect("valid"), 1.0)],
    )
    .expect("two variables");
    Ptf::new(p, 1.0)
}

/// `arccos(1 − δ)/π`, the Gaussian noise sensitivity of a halfspace through 0.
pub fn dictator_gns(delta: f64) -> f64 {
    (1.0 - delta).acos() / std::f64::consts::PI
}

fn gns(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    let dictator = Ptf::<f64>::dictator(1, 0);
    for (k, delta) in [0.01, 0.1, 0.5].into_iter().enumerate() {
        let seed = splitmix64(opts.seed ^ (k as u64 + 1));
        let est = gns_mc(&dictator, delta, &opts.mc(1_000_000, seed))?;
        let exact = dictator_gns(delta);
        let diff = (est.value - exact).abs();
        out.push(CheckReport::exact(
            "gns",
            format!("dictator delta={delta} arccos"),
            diff,
            est.half_width,
            est.value,
            seed,
        ));
    }
    let f = ellipsoid();
    let exponent = 1.0 / 5.0;
    let grid = log_grid(1e-3, 1e-1, 7);
    let points: Vec<ConstantPoint> = grid
        .iter()
        .enumerate()
        .map(|(k, &delta)| {
            let seed = splitmix64(opts.seed ^ (0x100 + k as u64));
            let est = gns_mc(&f, delta, &opts.mc(400_000, seed))?;
            let s = delta.powf(exponent);
            Ok(ConstantPoint { grid: delta, value: est.value / s, upper: est.upper() / s })
        })
        .collect::<Result<_>>()?;
    out.push(drift_report("gns", "ellipsoid x0^2+x1^2>=1 exponent=1/5 delta=1e-1..1e-3".into(), &points, opts.drift_factor, opts.seed)?);
    Ok(out)
}

/// Interval grid for hypercube anti-concentration, longest first.
const MAJ_ALPHA_GRID: [f64; 6] = [2.0, 1.5, 1.25, 1.0, 0.8, 0.6];

fn cw(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    let maj = Polynomial::<f64>::majority(20);
    let points: Vec<ConstantPoint> = MAJ_ALPHA_GRID
        .iter()
        .map(|&alpha| {
            let p = anticoncentration(&maj, -alpha, 2.0 * alpha, &Measure::HypercubeExact)?;
            Ok(ConstantPoint::exact(alpha, p.value() / alpha))
        })
        .collect::<Result<_>>()?;
    out.push(drift_report("cw", "maj20 cube |P|<=alpha exponent=1".into(), &points, opts.drift_factor, 0)?);

    // Gaussian measure, degree-d polynomials against d α^{1/d}.
    let grid = log_grid(0.05, 0.5, 5);
    for (i, d) in [1usize, 2, 3].into_iter().enumerate() {
        let seed = instance_rng(opts, "cw", i).next_u64();
        let p = random_polynomial::<f64>(6, d, CoefficientModel::UnitGaussian, seed)?;
        let points: Vec<ConstantPoint> = grid
            .iter()
            .enumerate()
            .map(|(k, &alpha)| {
                let mc = opts.mc(1_000_000, splitmix64(seed ^ k as u64));
                let m = anticoncentration(&p, -alpha / 2.0, alpha, &Measure::GaussianMc(mc))?;
                let s = d as f64 * alpha.powf(1.0 / d as f64);
                Ok(ConstantPoint { grid: alpha, value: m.value() / s, upper: m.upper() / s })
            })
            .collect::<Result<_>>()?;
        out.push(drift_report(
            "cw",
            format!("gaussian n=6 d={d} interval about 0 alpha=0.5..0.05"),
            &points,
            opts.drift_factor,
            seed,
        )?);
    }
    Ok(out)
}

/// CDF grid for invariance checks; includes the median point 0.
const INVARIANCE_GRID: [f64; 9] = [-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0];

fn invariance(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let eps = 0.5;
    let mut gaps = Vec::new();
    for (k, n) in [10usize, 20].into_iter().enumerate() {
        let seed = splitmix64(opts.seed ^ (0x200 + k as u64));
        let g = invariance_gap(&Polynomial::<f64>::majority(n), eps, &INVARIANCE_GRID, &opts.mc(400_000, seed))?;
        gaps.push((n, g, seed));
    }
    let (_, small, _) = &gaps[0];
    let (_, large, seed) = &gaps[1];
    let lhs_hi = large.gap + large.half_width;
    let rhs_lo = small.gap - small.half_width;
    let status = if lhs_hi < rhs_lo {
        Status::Pass
    } else if large.gap < small.gap {
        Status::Inconclusive
    } else {
        Status::Fail
    };
    Ok(vec![CheckReport::new(
        "invariance",
        format!("maj gap n=20 vs n=10 eps={eps} gaps={:.4},{:.4}", large.gap, small.gap),
        lhs_hi,
        rhs_lo,
        large.gap / small.gap,
        status,
        *seed,
    )])
}

fn regac(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let d = 2usize;
    ensemble(opts.trials(5), |i| {
        let mut rng = instance_rng(opts, "regac", i);
        let n = rng.random_range(16..=20);
        let inst = Instance::with(n, d, CoefficientModel::MajorityLike, rng.next_u64())?;
        let eps = WeightProfile::new(&inst.poly)?.regularity();
        let floor = eps.powf(2.0 / (4 * d + 1) as f64);
        let points: Vec<ConstantPoint> = MAJ_ALPHA_GRID
            .iter()
            .map(|&alpha| {
                let p = anticoncentration(&inst.poly, -alpha / 2.0, alpha, &Measure::HypercubeExact)?;
                Ok(ConstantPoint::exact(alpha, p.value() / (alpha.powf(1.0 / d as f64) + floor)))
            })
            .collect::<Result<_>>()?;
        let desc = format!("{} regularity={eps:.4}", inst.desc);
        Ok(vec![drift_report("regac", desc, &points, opts.drift_factor, inst.seed)?])
    })
}

fn nsregular(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    let grid = [0.9, 0.7, 0.5, 0.4, 0.3, 0.25];
    let maj = Ptf::<f64>::majority(17);
    let spectrum = TruthTable::from_ptf(&maj)?.fourier_transform();
    let points: Vec<ConstantPoint> = grid
        .iter()
        .map(|&eps| Ok(ConstantPoint::exact(eps, ns_exact_spectral(&spectrum, eps)? / eps.powf(0.25))))
        .collect::<Result<_>>()?;
    out.push(drift_report("nsregular", "maj17 d=1 eps=0.9..0.25".into(), &points, opts.drift_factor, 0)?);

    let d = 2usize;
    let seed = instance_rng(opts, "nsregular", 0).next_u64();
    let inst = Instance::with(16, d, CoefficientModel::MajorityLike, seed)?;
    let reg = WeightProfile::new(&inst.poly)?.regularity();
    let spectrum = TruthTable::from_ptf(&inst.ptf())?.fourier_transform();
    let points: Vec<ConstantPoint> = grid
        .iter()
        .filter(|&&eps| eps >= reg)
        .map(|&eps| {
            let ns = ns_exact_spectral(&spectrum, eps)?;
            Ok(ConstantPoint::exact(eps, ns / eps.powf(1.0 / (2 * d + 2) as f64)))
        })
        .collect::<Result<_>>()?;
    if !points.is_empty() {
        out.push(drift_report(
            "nsregular",
            format!("{} regularity={reg:.4}", inst.desc),
            &points,
            opts.drift_factor,
            seed,
        )?);
    }
    Ok(out)
}

fn bns(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    let maj = Ptf::<f64>::majority(1001);
    let grid = log_grid(1e-3, 1e-1, 5);
    let ests = grid
        .iter()
        .enumerate()
        .map(|(k, &delta)| {
            let seed = splitmix64(opts.seed ^ (0x300 + k as u64));
            ns_mc(&maj, delta, &opts.mc(400_000, seed))
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = grid.iter().zip(&ests).map(|(&d, e)| (d, e.value)).collect();
    let slope = log_log_slope(&pts)?;
    out.push(slope_report("bns", "maj1001 mc delta=1e-1..1e-3".into(), slope, 0.5, 0.1, opts.seed));
    let exponent = 1.0 / 10.0;
    let points: Vec<ConstantPoint> = grid
        .iter()
        .zip(&ests)
        .map(|(&d, e)| {
            let s = d.powf(exponent);
            ConstantPoint { grid: d, value: e.value / s, upper: e.upper() / s }
        })
        .collect();
    out.push(drift_report("bns", "maj1001 exponent=1/10".into(), &points, opts.drift_factor, opts.seed)?);

    let exponent = 1.0 / 14.0;
    let grid = [0.1, 0.05, 0.02, 0.01];
    let ensemble_reports = ensemble(opts.trials(10), |i| {
        let mut rng = instance_rng(opts, "bns", i);
        let inst = Instance::with(12, 2, MODELS[rng.random_range(0..4)], rng.next_u64())?;
        let spectrum = TruthTable::from_ptf(&inst.ptf())?.fourier_transform();
        let points: Vec<ConstantPoint> = grid
            .iter()
            .map(|&delta| Ok(ConstantPoint::exact(delta, ns_exact_spectral(&spectrum, delta)? / delta.powf(exponent))))
            .collect::<Result<_>>()?;
        Ok(vec![drift_report("bns", format!("{} exponent=1/14", inst.desc), &points, opts.drift_factor, inst.seed)?])
    })?;
    out.extend(ensemble_reports);
    Ok(out)
}

fn as_bound(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    let exponent = 1.0 - 1.0 / 10.0;
    let points: Vec<ConstantPoint> = [5usize, 9, 13, 17, 21]
        .iter()
        .map(|&n| {
            let t = TruthTable::from_ptf(&Ptf::<f64>::majority(n))?;
            Ok(ConstantPoint::exact(n as f64, average_sensitivity_exact(&t) / (n as f64).powf(exponent)))
        })
        .collect::<Result<_>>()?;
    out.push(drift_report("as", "maj n=5..21 exponent=9/10".into(), &points, opts.drift_factor, 0)?);

    let exponent = 1.0 - 1.0 / 14.0;
    for model in [CoefficientModel::UnitGaussian, CoefficientModel::SignedUnit] {
        let points: Vec<ConstantPoint> = [6usize, 9, 12, 15, 18]
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let seed = splitmix64(opts.seed ^ suite_tag(model.name()) ^ k as u64);
                let f = Ptf::new(random_polynomial::<f64>(n, 2, model, seed)?, 0.0);
                let t = TruthTable::from_ptf(&f)?;
                Ok(ConstantPoint::exact(n as f64, average_sensitivity_exact(&t) / (n as f64).powf(exponent)))
            })
            .collect::<Result<_>>()?;
        out.push(drift_report(
            "as",
            format!("d=2 model={} n=6..18 exponent=13/14", model.name()),
            &points,
            opts.drift_factor,
            opts.seed,
        )?);
    }
    Ok(out)
}

const ACTONS_RHO: [f64; 4] = [0.01, 0.05, 0.1, 0.2];
const ACTONS_DELTA: [f64; 3] = [0.1, 0.25, 0.5];

fn actons(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    ensemble(opts.trials(200), |i| {
        let inst = Instance::random(&mut instance_rng(opts, "actons", i), 1, 10, 2)?;
        let f = inst.ptf();
        let mut out = Vec::new();
        for rho in ACTONS_RHO {
            for delta in ACTONS_DELTA {
                let r = check_actons(&f, rho, delta)?;
                let desc = format!("{} rho={rho} delta={delta}", inst.desc);
                out.push(tagged(r, "actons", &desc, inst.seed));
            }
        }
        Ok(out)
    })
}

fn learner_target(opts: &SuiteOptions, suite: &str, i: usize) -> Result<(Ptf<f64>, u64)> {
    let seed = instance_rng(opts, suite, i).next_u64();
    Ok((random_ptf::<f64>(10, 2, CoefficientModel::UnitGaussian, seed)?, seed))
}

fn realizable(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    ensemble(opts.trials(50), |i| {
        let (f, seed) = learner_target(opts, "realizable", i)?;
        let sample = LabeledSample::full_cube(&f)?;
        let h = fit(&sample, 2, &FitConfig::default())?;
        let err = evaluate(&h, &sample)?.error;
        Ok(vec![CheckReport::exact("realizable", "n=10 d=2 D=2 full cube", err, 0.0, err, seed)])
    })
}

const AGNOSTIC_NOISE: f64 = 0.05;
const AGNOSTIC_EXCESS: f64 = 0.1;
const AGNOSTIC_FRACTION: f64 = 0.9;

/// Excess error per noisy trial, judged in aggregate; plus a per-trial
/// check that the fit's squared loss is at most the best rescaling of the
/// generating polynomial.
fn agnostic(opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let m = opts.samples(20000) as usize;
    let trials = opts.trials(50);
    let rows = ensemble(trials, |i| {
        let (f, seed) = learner_target(opts, "agnostic", i)?;
        let sample = LabeledSample::from_target(&f, AGNOSTIC_NOISE, m, seed)?;
        let h = fit(&sample, 4, &FitConfig::default())?;
        let excess = evaluate_exact(&h, &f, AGNOSTIC_NOISE)?.excess.expect("known noise rate");
        let generator_loss = best_rescaled_loss(&f.poly, &sample);
        let loss = squared_loss(&h.poly, &sample);
        let desc = format!("n=10 d=2 D=4 m={m} noise={AGNOSTIC_NOISE}");
        Ok(vec![
            CheckReport::exact("agnostic", format!("{desc} excess"), excess, AGNOSTIC_EXCESS, excess, seed),
            CheckReport::summed("agnostic", format!("{desc} squared loss"), loss, generator_loss, loss, seed),
        ])
    })?;
    let excess: Vec<&CheckReport> = rows.iter().step_by(2).collect();
    let good = excess.iter().filter(|r| r.passed()).count() as f64 / trials.max(1) as f64;
    let worst = excess.iter().map(|r| r.lhs).fold(0.0, f64::max);
    let mut out = vec![CheckReport::exact(
        "agnostic",
        format!("fraction of {trials} trials with excess <= {AGNOSTIC_EXCESS}"),
        AGNOSTIC_FRACTION,
        good,
        worst,
        opts.seed,
    )];
    out.extend(rows.into_iter().skip(1).step_by(2));
    Ok(out)
}

/// `min_c` squared loss of `c·P` on the sample.
fn best_rescaled_loss(p: &Polynomial<f64>, sample: &LabeledSample) -> f64 {
    let (mut py, mut pp) = (0.0, 0.0);
    for (x, &y) in sample.points().iter().zip(sample.labels()) {
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let v = p.evaluate_unchecked(&xf);
        py += v * y as f64;
        pp += v * v;
    }
    let c = if pp > 0.0 { py / pp } else { 0.0 };
    squared_loss(&p.scale(c), sample)
}
