//! Single-instance checks computed exactly by enumeration of the cube.

use super::report::{CheckReport, Status};
use crate::error::{invalid, Error, Result};
use crate::hypercube::{average_sensitivity_exact, cube_values, ns_exact_direct, ns_exact_spectral, TruthTable};
use crate::poly::{Monomial, Polynomial, Ptf};
use crate::scalar::Scalar;

fn values_f64<T: Scalar>(p: &Polynomial<T>) -> Result<Vec<f64>> {
    cube_values(&p.cast::<f64>())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `E[Q²R²] <= 9^d E[Q²] E[R²]` with `d` the larger degree.
pub fn check_hypercontractivity<T: Scalar>(q: &Polynomial<T>, r: &Polynomial<T>) -> Result<CheckReport> {
    if q.n() != r.n() {
        return Err(Error::DimensionMismatch { expected: q.n(), got: r.n() });
    }
    let d = q.degree().max(r.degree());
    let qv = values_f64(q)?;
    let rv = values_f64(r)?;
    let qq = mean(&qv.iter().map(|v| v * v).collect::<Vec<_>>());
    let rr = mean(&rv.iter().map(|v| v * v).collect::<Vec<_>>());
    let lhs = mean(&qv.iter().zip(&rv).map(|(a, b)| a * a * b * b).collect::<Vec<_>>());
    let rhs = 9f64.powi(d as i32) * qq * rr;
    let ratio = if qq * rr > 0.0 { lhs / (qq * rr) } else { 0.0 };
    Ok(CheckReport::summed("hypercon", format!("n={} d={}", q.n(), d), lhs, rhs, ratio, 0))
}

/// The tail floors for `A = Q − E[Q]` with `b = 9^d`:
/// `Pr[A >= σ/(4√b)] >= 1/(4^{4/3} b)` and `Pr[Q >= E[Q]] >= 1/(4^{4/3} 9^d)`.
/// Floor checks carry the floor in `lhs` and the probability in `rhs`.
pub fn check_poly_lower_bounds<T: Scalar>(q: &Polynomial<T>) -> Result<(CheckReport, CheckReport)> {
    if !q.is_multilinear() {
        return Err(Error::NotMultilinear);
    }
    let d = q.degree();
    let b = 9f64.powi(d as i32);
    let floor = 1.0 / (4f64.powf(4.0 / 3.0) * b);
    let desc = format!("n={} d={}", q.n(), d);
    let sigma_sq = q.variance()?.as_f64();
    if sigma_sq == 0.0 {
        return Ok((
            CheckReport::new("problm", format!("{desc} zero-variance"), 0.0, 0.0, 0.0, Status::Pass, 0),
            CheckReport::new("polylb1", format!("{desc} zero-variance"), 0.0, 0.0, 0.0, Status::Pass, 0),
        ));
    }
    let values = values_f64(q)?;
    let mean = q.constant_term().as_f64();
    let size = values.len() as f64;
    let cut = sigma_sq.sqrt() / (4.0 * b.sqrt());
    let above_cut = values.iter().filter(|&&v| v - mean >= cut).count() as f64 / size;
    let above_mean = values.iter().filter(|&&v| v >= mean).count() as f64 / size;
    Ok((
        CheckReport::exact("problm", desc.clone(), floor, above_cut, above_cut / floor, 0),
        CheckReport::exact("polylb1", desc, floor, above_mean, above_mean / floor, 0),
    ))
}

/// `(E|Σ_i x_i f_i(x)|)²` and `2 Σ_i AS(f_i) + n`, exactly.
pub fn mainlmc_sides(tables: &[TruthTable]) -> Result<(f64, f64)> {
    let n = tables.len();
    for (i, t) in tables.iter().enumerate() {
        if t.n() != n {
            return Err(Error::DimensionMismatch { expected: n, got: t.n() });
        }
        if !t.independent_of(i) {
            return Err(Error::DependsOnOwnCoordinate { index: i });
        }
    }
    if n == 0 {
        return Err(invalid("need at least one function"));
    }
    let size = 1usize << n;
    let mut total: i64 = 0;
    for x in 0..size {
        let mut s: i64 = 0;
        for (i, t) in tables.iter().enumerate() {
            let xi = if (x >> i) & 1 == 1 { 1 } else { -1 };
            s += xi * t.get(x) as i64;
        }
        total += s.abs();
    }
    let e = total as f64 / size as f64;
    let sensitivity: f64 = tables.iter().map(average_sensitivity_exact).sum();
    Ok((e * e, 2.0 * sensitivity + n as f64))
}

pub fn check_mainlmc<T: Scalar>(fs: &[Ptf<T>]) -> Result<CheckReport> {
    let tables = fs.iter().map(TruthTable::from_ptf).collect::<Result<Vec<_>>>()?;
    let (lhs, rhs) = mainlmc_sides(&tables)?;
    Ok(CheckReport::exact("mainlmc", format!("n={}", fs.len()), lhs, rhs, lhs / rhs, 0))
}

/// `n = m²` variables in `m` blocks; `f_i` is the product of the other
/// variables in the block of `i`.
pub fn block_tightness_instance(n: usize) -> Result<Vec<Ptf<f64>>> {
    let m = (n as f64).sqrt().round() as usize;
    if m == 0 || m * m != n {
        return Err(invalid(format!("n = {n} is not a positive perfect square")));
    }
    Ok((0..n)
        .map(|i| {
            let start = (i / m) * m;
            let others = (start..start + m).filter(|&k| k != i);
            let mut p = Polynomial::zero(n);
            p.add_term(Monomial::from_set(others), 1.0).expect("indices < n");
            Ptf::new(p, 0.0)
        })
        .collect())
}

/// `AS(f) <= 3 n^{1 − 2^{−d}}`, no tolerance.
pub fn check_combas<T: Scalar>(f: &Ptf<T>) -> Result<CheckReport> {
    if !f.poly.is_multilinear() {
        return Err(Error::NotMultilinear);
    }
    let t = TruthTable::from_ptf(f)?;
    let n = f.n() as f64;
    let d = f.degree() as i32;
    let lhs = average_sensitivity_exact(&t);
    let exponent = 1.0 - 2f64.powi(-d);
    let rhs = 3.0 * n.powf(exponent);
    Ok(CheckReport::exact("combas", format!("n={} d={}", f.n(), d), lhs, rhs, lhs / n.powf(exponent), 0))
}

/// `AS(f) <= 2 n e NS_{1/n}(f)` with the flip-pattern NS sum.
pub fn check_nstoas<T: Scalar>(f: &Ptf<T>) -> Result<CheckReport> {
    let t = TruthTable::from_ptf(f)?;
    let n = f.n();
    let lhs = average_sensitivity_exact(&t);
    let ns = ns_exact_direct(&t, 1.0 / n as f64)?;
    let rhs = 2.0 * n as f64 * std::f64::consts::E * ns;
    let achieved = if ns > 0.0 { lhs / (n as f64 * ns) } else { 0.0 };
    Ok(CheckReport::summed("nstoas", format!("n={} d={}", n, f.degree()), lhs, rhs, achieved, 0))
}

/// `NS_ρ(f) <= (d+1)δ + Pr[|P − θ| <= 2√ρ/δ]` after scaling to `‖P‖ = 1`.
pub fn check_actons<T: Scalar>(f: &Ptf<T>, rho: f64, delta: f64) -> Result<CheckReport> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(invalid(format!("rho {rho} not in (0,1)")));
    }
    if delta.is_nan() || delta <= 0.0 {
        return Err(invalid(format!("delta {delta} must be positive")));
    }
    let g = f.normalized()?;
    let g = Ptf::new(g.poly.cast::<f64>(), g.theta.as_f64());
    let t = TruthTable::from_ptf(&g)?;
    let lhs = ns_exact_spectral(&t.fourier_transform(), rho)?;
    let values = cube_values(&g.poly)?;
    let margin = 2.0 * rho.sqrt() / delta;
    let near = values.iter().filter(|&&v| (v - g.theta).abs() <= margin).count() as f64 / values.len() as f64;
    let d = g.degree() as f64;
    let rhs = (d + 1.0) * delta + near;
    Ok(CheckReport::summed(
        "actons",
        format!("n={} d={} rho={rho} delta={delta}", g.n(), g.degree()),
        lhs,
        rhs,
        lhs / rhs,
        0,
    ))
}
