//! `ptfsense` command-line front end.

mod svg;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ptfsense::gaussian::{gns_mc, perturbation_norm_sq, perturbation_norm_sq_mc};
use ptfsense::hypercube::{as_mc, average_sensitivity_exact, ns_exact, ns_mc, McConfig, NsMethod, TruthTable};
use ptfsense::learn::{degree_for_accuracy, evaluate, evaluate_exact, fit, FitConfig, LabeledSample};
use ptfsense::limits::{exact_limit, set_exact_limit, BRUTE_LIMIT};
use ptfsense::poly::{parse_ptf, random_ptf, serialize_ptf, CoefficientModel};
use ptfsense::rng::with_workers;
use ptfsense::structure::{
    critical_index, decompose, weight_profile, Branching, DecomposeConfig, DecompositionTree, Evaluation,
};
use ptfsense::verify::{log_log_slope, overall, run_suite, to_csv, Status, SuiteOptions};
use ptfsense::{Ptf, Restriction};

#[derive(Parser)]
#[command(name = "ptfsense", version, about = "Sensitivity and structure of polynomial threshold functions")]
struct Cli {
    /// Worker threads; output does not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random or named PTF.
    Gen(GenArgs),
    /// Evaluate P and sign(P − θ) at a point.
    Eval(EvalArgs),
    /// Nonzero Fourier coefficients of the function.
    Fourier(FourierArgs),
    /// Average sensitivity.
    As(AsArgs),
    /// Noise sensitivity over a δ grid.
    Ns(NsArgs),
    /// Gaussian noise sensitivity and perturbation norms over a δ grid.
    Gns(GnsArgs),
    /// Coordinate weights w_i² and tail sums, heaviest first.
    Weights(FileArg),
    /// Critical index over an ε grid.
    CriticalIndex(EpsilonArgs),
    /// Regularity test over an ε grid.
    Regular(EpsilonArgs),
    /// Substitute ±1 values for some variables.
    Restrict(RestrictArgs),
    /// Regular / determined / capped decomposition tree.
    Decompose(DecomposeArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Fit a low-degree regression hypothesis on noisy samples of a target.
    Learn(LearnArgs),
    /// Sweep a measurement over a grid, with an optional SVG plot.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct FileArg {
    file: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dist {
    UnitGaussian,
    SignedUnit,
    MajorityLike,
    BlockStructured,
    /// Sum of all variables; `--d` is ignored.
    Majority,
    /// `x_0`; `--d` is ignored.
    Dictator,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, value_enum, default_value = "unit-gaussian")]
    dist: Dist,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    file: PathBuf,
    /// Comma-separated coordinates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    point: Vec<f64>,
}

#[derive(Args)]
struct FourierArgs {
    file: PathBuf,
    /// Omit coefficients with absolute value at or below this.
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
}

#[derive(Args, Clone, Copy)]
struct McArgs {
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl McArgs {
    fn config(&self) -> McConfig {
        McConfig::new(self.samples, self.confidence, self.seed)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Exact when n is within the truth-table limit, sampled otherwise.
    Auto,
    Exact,
    /// Exact flip-pattern enumeration (small n only).
    Direct,
    Mc,
}

#[derive(Args)]
struct AsArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    method: Method,
    #[command(flatten)]
    mc: McArgs,
}

#[derive(Args)]
struct NsArgs {
    file: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    delta: Vec<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    method: Method,
    #[command(flatten)]
    mc: McArgs,
}

#[derive(Args)]
struct GnsArgs {
    file: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    delta: Vec<f64>,
    #[command(flatten)]
    mc: McArgs,
}

#[derive(Args)]
struct EpsilonArgs {
    file: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    epsilon: Vec<f64>,
}

#[derive(Args)]
struct RestrictArgs {
    file: PathBuf,
    /// Assignments such as `0=+1,3=-1`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    assign: Vec<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    file: PathBuf,
    #[arg(long)]
    epsilon: f64,
    /// Build only the nodes visited by this many random points.
    #[arg(long)]
    paths: Option<u64>,
    #[arg(long, default_value_t = 1 << 20)]
    node_budget: usize,
    #[arg(long)]
    depth_cap: Option<usize>,
    /// Write the tree export to this file.
    #[arg(long)]
    tree: Option<PathBuf>,
    /// Sample leaf tests instead of enumerating when n exceeds the limit.
    #[command(flatten)]
    mc: McArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name, or `all`.
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LearnArgs {
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long)]
    samples: usize,
    #[arg(long, conflicts_with = "epsilon", required_unless_present = "epsilon")]
    degree: Option<usize>,
    /// Pick the degree from the accuracy target.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Constant inside the accuracy-to-degree rule.
    #[arg(long, default_value_t = 1.0)]
    accuracy_constant: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Held-out sample size when the target is too large to enumerate.
    #[arg(long, default_value_t = 20_000)]
    test_samples: usize,
    #[arg(long, default_value_t = 4096)]
    max_columns: usize,
    /// Write the hypothesis as a PTF file.
    #[arg(long)]
    hypothesis: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepKind {
    Ns,
    Gns,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(value_enum)]
    kind: SweepKind,
    file: PathBuf,
    /// Values of δ.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    grid: Vec<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    method: Method,
    /// Exponent of the reference line `c·δ^e`.
    #[arg(long, default_value_t = 0.5)]
    exponent: f64,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    mc: McArgs,
}

const HYPERCUBE_HEADER: [&str; 8] = ["n", "d", "delta", "value", "half_width", "samples", "seed", "method"];
const GAUSSIAN_HEADER: [&str; 6] = ["delta", "gns", "gns_halfwidth", "qnorm_closed", "qnorm_mc", "slope_window"];

/// CSV rows plus the `(grid, value)` points behind them.
type Rows = (Vec<Vec<String>>, Vec<(f64, f64)>);

fn num(v: f64) -> String {
    format!("{v}")
}

fn csv_table<R: AsRef<[String]>>(header: &[&str], rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.as_ref())?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?)
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("{}: cannot write", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<Ptf<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))?;
    parse_ptf(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn use_exact(method: Method, n: usize) -> bool {
    match method {
        Method::Auto => n <= exact_limit(),
        Method::Exact | Method::Direct => true,
        Method::Mc => false,
    }
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    let f = match a.dist {
        Dist::Majority => Ptf::<f64>::majority(a.n),
        Dist::Dictator => Ptf::<f64>::dictator(a.n, 0),
        Dist::UnitGaussian => random_ptf(a.n, a.d, CoefficientModel::UnitGaussian, a.seed)?,
        Dist::SignedUnit => random_ptf(a.n, a.d, CoefficientModel::SignedUnit, a.seed)?,
        Dist::MajorityLike => random_ptf(a.n, a.d, CoefficientModel::MajorityLike, a.seed)?,
        Dist::BlockStructured => random_ptf(a.n, a.d, CoefficientModel::BlockStructured, a.seed)?,
    };
    emit(&serialize_ptf(&f), a.output.as_deref())
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let f = load(&a.file)?;
    let value = f.poly.evaluate(&a.point)?;
    let s = f.evaluate(&a.point)?;
    emit(&csv_table(&["value", "sign"], &[vec![num(value), s.to_string()]])?, None)
}

fn cmd_fourier(a: &FourierArgs) -> Result<()> {
    let f = load(&a.file)?;
    let spectrum = TruthTable::from_ptf(&f)?.fourier_transform();
    let p = spectrum.to_polynomial();
    let rows: Vec<Vec<String>> = p
        .terms()
        .iter()
        .filter(|(_, c)| c.abs() > a.tol)
        .map(|(m, &c)| vec![m.to_string(), num(c)])
        .collect();
    emit(&csv_table(&["monomial", "coefficient"], &rows)?, None)
}

fn cmd_as(a: &AsArgs) -> Result<()> {
    let f = load(&a.file)?;
    let (n, d) = (f.n().to_string(), f.degree().to_string());
    let row = if use_exact(a.method, f.n()) {
        let t = TruthTable::from_ptf(&f)?;
        vec![n, d, String::new(), num(average_sensitivity_exact(&t)), num(0.0), String::new(), String::new(), "exact".into()]
    } else {
        let e = as_mc(&f, &a.mc.config())?;
        vec![n, d, String::new(), num(e.value), num(e.half_width), e.samples.to_string(), e.seed.to_string(), "mc".into()]
    };
    emit(&csv_table(&HYPERCUBE_HEADER, &[row])?, None)
}

fn ns_rows(f: &Ptf<f64>, deltas: &[f64], method: Method, mc: &McArgs) -> Result<Rows> {
    let (n, d) = (f.n().to_string(), f.degree().to_string());
    let mut rows = Vec::new();
    let mut points = Vec::new();
    let table = if use_exact(method, f.n()) { Some(TruthTable::from_ptf(f)?) } else { None };
    for &delta in deltas {
        let row = match &table {
            Some(t) => {
                let (m, label) = if method == Method::Direct || (method == Method::Auto && f.n() <= BRUTE_LIMIT) {
                    (NsMethod::Direct, "exact-direct")
                } else {
                    (NsMethod::Spectral, "exact-spectral")
                };
                let v = ns_exact(t, delta, m)?;
                points.push((delta, v));
                vec![n.clone(), d.clone(), num(delta), num(v), num(0.0), String::new(), String::new(), label.into()]
            }
            None => {
                let e = ns_mc(f, delta, &mc.config())?;
                points.push((delta, e.value));
                vec![
                    n.clone(),
                    d.clone(),
                    num(delta),
                    num(e.value),
                    num(e.half_width),
                    e.samples.to_string(),
                    e.seed.to_string(),
                    "mc".into(),
                ]
            }
        };
        rows.push(row);
    }
    Ok((rows, points))
}

fn cmd_ns(a: &NsArgs) -> Result<()> {
    let f = load(&a.file)?;
    let (rows, _) = ns_rows(&f, &a.delta, a.method, &a.mc)?;
    emit(&csv_table(&HYPERCUBE_HEADER, &rows)?, None)
}

/// Rows of the Gaussian sweep table; `slope_window` is the log-log slope of
/// GNS over the point and its grid neighbours.
fn gns_rows(f: &Ptf<f64>, deltas: &[f64], mc: &McArgs) -> Result<Rows> {
    let mut points = Vec::new();
    let mut partial = Vec::new();
    for &delta in deltas {
        let e = gns_mc(f, delta, &mc.config())?;
        let closed = perturbation_norm_sq(&f.poly, delta)?.sqrt();
        let sampled = perturbation_norm_sq_mc(&f.poly, delta, mc.samples.max(2), mc.seed)?.mean.sqrt();
        points.push((delta, e.value));
        partial.push(vec![num(delta), num(e.value), num(e.half_width), num(closed), num(sampled)]);
    }
    for (i, row) in partial.iter_mut().enumerate() {
        let window: Vec<(f64, f64)> =
            points[i.saturating_sub(1)..(i + 2).min(points.len())].iter().copied().filter(|p| p.1 > 0.0).collect();
        row.push(log_log_slope(&window).map(num).unwrap_or_default());
    }
    Ok((partial, points))
}

fn cmd_gns(a: &GnsArgs) -> Result<()> {
    let f = load(&a.file)?;
    let (rows, _) = gns_rows(&f, &a.delta, &a.mc)?;
    emit(&csv_table(&GAUSSIAN_HEADER, &rows)?, None)
}

fn cmd_weights(a: &FileArg) -> Result<()> {
    let f = load(&a.file)?;
    let w = weight_profile(&f.poly)?;
    let rows: Vec<Vec<String>> = (0..w.n())
        .map(|k| vec![k.to_string(), w.perm[k].to_string(), num(w.sorted_w_sq[k]), num(w.sigma_sq[k])])
        .collect();
    emit(&csv_table(&["rank", "variable", "w_sq", "sigma_sq"], &rows)?, None)
}

fn cmd_critical_index(a: &EpsilonArgs) -> Result<()> {
    let f = load(&a.file)?;
    let mut rows = Vec::new();
    for &eps in &a.epsilon {
        rows.push(vec![num(eps), critical_index(&f.poly, eps)?.to_string(), f.n().to_string()]);
    }
    emit(&csv_table(&["epsilon", "critical_index", "n"], &rows)?, None)
}

fn cmd_regular(a: &EpsilonArgs) -> Result<()> {
    let f = load(&a.file)?;
    let w = weight_profile(&f.poly)?;
    let mut rows = Vec::new();
    for &eps in &a.epsilon {
        rows.push(vec![num(eps), w.is_regular(eps)?.to_string(), num(w.regularity())]);
    }
    emit(&csv_table(&["epsilon", "regular", "regularity"], &rows)?, None)
}

fn parse_assignment(s: &str) -> Result<(usize, i8)> {
    let (var, value) = s.split_once('=').ok_or_else(|| anyhow!("assignment '{s}' is not of the form i=±1"))?;
    let var: usize = var.trim().parse().with_context(|| format!("bad variable index in '{s}'"))?;
    let value = match value.trim() {
        "+1" | "1" => 1,
        "-1" => -1,
        other => bail!("value '{other}' in '{s}' is not ±1"),
    };
    Ok((var, value))
}

fn cmd_restrict(a: &RestrictArgs) -> Result<()> {
    let f = load(&a.file)?;
    let pairs = a.assign.iter().map(|s| parse_assignment(s)).collect::<Result<Vec<_>>>()?;
    let r = Restriction::from_pairs(pairs)?;
    emit(&serialize_ptf(&f.restrict(&r)?), a.output.as_deref())
}

fn cmd_decompose(a: &DecomposeArgs) -> Result<()> {
    let f = load(&a.file)?;
    let cfg = DecomposeConfig {
        branching: match a.paths {
            Some(paths) => Branching::Sampled { paths, seed: a.mc.seed },
            None => Branching::Exhaustive,
        },
        node_budget: a.node_budget,
        evaluation: if f.n() <= exact_limit() { Evaluation::Exact } else { Evaluation::auto(a.mc.config()) },
        depth_cap: a.depth_cap,
        ..DecomposeConfig::default()
    };
    let tree = decompose(&f, a.epsilon, &cfg)?;
    if let Some(path) = &a.tree {
        emit(&tree.export(), Some(path))?;
    }
    emit(&format!("{}\n{}\n", DecompositionTree::CSV_HEADER, tree.csv_row()), None)
}

fn cmd_verify(a: &VerifyArgs) -> Result<Status> {
    let opts = SuiteOptions { trials: a.trials, samples: a.samples, ..SuiteOptions::with_seed(a.seed) };
    let reports = run_suite(&a.suite, &opts)?;
    emit(&to_csv(&reports), a.out.as_deref())?;
    let status = overall(&reports);
    let failing = reports.iter().filter(|r| r.status == Status::Fail).count();
    let unsure = reports.iter().filter(|r| r.status == Status::Inconclusive).count();
    eprintln!("{}: {} checks, {failing} failed, {unsure} inconclusive", a.suite, reports.len());
    Ok(status)
}

fn cmd_learn(a: &LearnArgs) -> Result<()> {
    let f = load(&a.target)?;
    let degree = match (a.degree, a.epsilon) {
        (Some(d), _) => d,
        (None, Some(eps)) => {
            let d = degree_for_accuracy(f.degree().max(1), eps, a.accuracy_constant)?;
            usize::try_from(d).unwrap_or(usize::MAX)
        }
        (None, None) => bail!("one of --degree or --epsilon is required"),
    };
    let sample = LabeledSample::from_target(&f, a.noise, a.samples, a.seed)?;
    let h = fit(&sample, degree, &FitConfig { max_columns: a.max_columns })?;
    let outcome = if f.n() <= exact_limit() {
        evaluate_exact(&h, &f, a.noise)?
    } else {
        let test = LabeledSample::from_target(&f, a.noise, a.test_samples, a.seed.wrapping_add(1))?;
        let mut o = evaluate(&h, &test)?;
        o.opt = Some(a.noise);
        o.excess = Some(o.error - a.noise);
        o
    };
    if let Some(path) = &a.hypothesis {
        emit(&serialize_ptf(&h.as_ptf()), Some(path))?;
    }
    let row = vec![
        num(outcome.error),
        outcome.opt.map(num).unwrap_or_default(),
        outcome.excess.map(num).unwrap_or_default(),
        degree.to_string(),
        a.samples.to_string(),
        a.seed.to_string(),
    ];
    emit(&csv_table(&["error", "opt", "excess", "D", "m", "seed"], &[row])?, None)
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    if a.grid.is_empty() {
        bail!("empty grid");
    }
    let f = load(&a.file)?;
    let (csv, points, label) = match a.kind {
        SweepKind::Ns => {
            let (rows, pts) = ns_rows(&f, &a.grid, a.method, &a.mc)?;
            (csv_table(&HYPERCUBE_HEADER, &rows)?, pts, "NS")
        }
        SweepKind::Gns => {
            let (rows, pts) = gns_rows(&f, &a.grid, &a.mc)?;
            (csv_table(&GAUSSIAN_HEADER, &rows)?, pts, "GNS")
        }
    };
    emit(&csv, a.output.as_deref())?;
    let positive: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.1 > 0.0).collect();
    if let Ok(slope) = log_log_slope(&positive) {
        eprintln!("fitted log-log slope: {slope}");
    }
    if let Some(path) = &a.svg {
        let (x0, y0) = positive.first().copied().unwrap_or((1.0, 1.0));
        let reference: Vec<(f64, f64)> = a.grid.iter().map(|&x| (x, y0 * (x / x0).powf(a.exponent))).collect();
        let plot = svg::log_log_plot(
            &format!("{label} sweep, n = {}, d = {}", f.n(), f.degree()),
            "delta",
            label,
            &[
                svg::Series { label: label.to_string(), points, dashed: false },
                svg::Series { label: format!("delta^{}", a.exponent), points: reference, dashed: true },
            ],
        );
        emit(&plot, Some(path))?;
    }
    Ok(())
}

fn dispatch(command: &Command) -> Result<Status> {
    match command {
        Command::Gen(a) => cmd_gen(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Fourier(a) => cmd_fourier(a),
        Command::As(a) => cmd_as(a),
        Command::Ns(a) => cmd_ns(a),
        Command::Gns(a) => cmd_gns(a),
        Command::Weights(a) => cmd_weights(a),
        Command::CriticalIndex(a) => cmd_critical_index(a),
        Command::Regular(a) => cmd_regular(a),
        Command::Restrict(a) => cmd_restrict(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Verify(a) => return cmd_verify(a),
        Command::Learn(a) => cmd_learn(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
    .map(|()| Status::Pass)
}

/// 0 when every check passed, 2 on any failure, 3 when the only
/// shortfalls are inconclusive.
fn exit_code(status: Status) -> u8 {
    match status {
        Status::Pass => 0,
        Status::Fail => 2,
        Status::Inconclusive => 3,
    }
}

fn apply_env() -> Result<()> {
    if let Ok(v) = std::env::var("PTFSENSE_EXACT_LIMIT") {
        let limit: usize = v.trim().parse().with_context(|| format!("PTFSENSE_EXACT_LIMIT='{v}' is not an integer"))?;
        set_exact_limit(limit);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = apply_env() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    let result = match cli.workers {
        Some(w) => with_workers(w, || dispatch(&cli.command)),
        None => dispatch(&cli.command),
    };
    match result {
        Ok(status) => ExitCode::from(exit_code(status)),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
