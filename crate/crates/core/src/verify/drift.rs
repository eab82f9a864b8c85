use super::report::Status;
use crate::error::{Error, Result};

/// Default allowed growth of the achieved constant over its median.
pub const DRIFT_FACTOR: f64 = 1.5;

/// Achieved constant at one grid point; `upper` is the top of its
/// confidence interval (equal to `value` for exact points).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantPoint {
    pub grid: f64,
    pub value: f64,
    pub upper: f64,
}

impl ConstantPoint {
    pub fn exact(grid: f64, value: f64) -> Self {
        Self { grid, value, upper: value }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftResult {
    pub median: f64,
    /// Largest constant (upper end) at or beyond the median position.
    pub worst_tail: f64,
    pub status: Status,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite constants"));
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Bounded-constant check for a grid ordered toward the asymptotic limit
/// (smaller `δ`, larger `n`, shorter interval). Passes when every point
/// from the median position on stays within `factor` times the median of
/// all point values; inconclusive when only the interval upper ends
/// exceed it.
pub fn drift_check(points: &[ConstantPoint], factor: f64) -> Result<DriftResult> {
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let med = median(points.iter().map(|p| p.value).collect());
    let tail = &points[(points.len() - 1) / 2..];
    let limit = factor * med;
    let worst_value = tail.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max);
    let worst_upper = tail.iter().map(|p| p.upper).fold(f64::NEG_INFINITY, f64::max);
    let status = if worst_upper <= limit {
        Status::Pass
    } else if worst_value <= limit {
        Status::Inconclusive
    } else {
        Status::Fail
    };
    Ok(DriftResult { median: med, worst_tail: worst_upper, status })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::EmptyGrid);
    }
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_drift_fails() {
        // C* = δ^{-0.4} over a decade of δ, ordered by decreasing δ.
        let pts: Vec<ConstantPoint> = [0.1, 0.05, 0.02, 0.01]
            .iter()
            .map(|&d: &f64| ConstantPoint::exact(d, d.powf(-0.4)))
            .collect();
        assert_eq!(drift_check(&pts, DRIFT_FACTOR).unwrap().status, Status::Fail);
    }

    #[test]
    fn decreasing_constant_passes() {
        let pts: Vec<ConstantPoint> =
            [0.1, 0.05, 0.02, 0.01].iter().map(|&d: &f64| ConstantPoint::exact(d, d.powf(0.4))).collect();
        let r = drift_check(&pts, DRIFT_FACTOR).unwrap();
        assert_eq!(r.status, Status::Pass);
    }

    #[test]
    fn wide_interval_is_inconclusive() {
        let pts = [
            ConstantPoint::exact(1.0, 1.0),
            ConstantPoint::exact(0.5, 1.0),
            ConstantPoint { grid: 0.1, value: 1.2, upper: 2.0 },
        ];
        assert_eq!(drift_check(&pts, DRIFT_FACTOR).unwrap().status, Status::Inconclusive);
        assert!(drift_check(&[], DRIFT_FACTOR).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [1e-3, 1e-2, 1e-1].iter().map(|&x: &f64| (x, 3.0 * x.sqrt())).collect();
        assert!((log_log_slope(&pts).unwrap() - 0.5).abs() < 1e-12);
    }
}
