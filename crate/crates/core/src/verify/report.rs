use std::fmt;

/// Outcome of one check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    Pass,
    /// A sampled quantity's interval straddles the bound.
    Inconclusive,
    Fail,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "true",
            Status::Fail => "false",
            Status::Inconclusive => "inconclusive",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    /// The worse of two outcomes.
    pub fn and(self, other: Status) -> Status {
        self.max(other)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One checked inequality `lhs <= rhs` on one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub suite: String,
    pub instance: String,
    pub lhs: f64,
    pub rhs: f64,
    pub achieved_constant: f64,
    pub status: Status,
    pub seed: u64,
}

pub const CSV_HEADER: &str = "suite,instance,lhs,rhs,achieved_constant,passed,seed";

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl CheckReport {
    pub fn new(
        suite: &str,
        instance: impl Into<String>,
        lhs: f64,
        rhs: f64,
        achieved_constant: f64,
        status: Status,
        seed: u64,
    ) -> Self {
        Self { suite: suite.to_string(), instance: instance.into(), lhs, rhs, achieved_constant, status, seed }
    }

    /// `lhs <= rhs` with no tolerance.
    pub fn exact(suite: &str, instance: impl Into<String>, lhs: f64, rhs: f64, achieved: f64, seed: u64) -> Self {
        Self::new(suite, instance, lhs, rhs, achieved, Status::from_bool(lhs <= rhs), seed)
    }

    /// `lhs <= rhs` allowing `1e-9` relative accumulation slack.
    pub fn summed(suite: &str, instance: impl Into<String>, lhs: f64, rhs: f64, achieved: f64, seed: u64) -> Self {
        let ok = lhs <= rhs + 1e-9 * rhs.abs().max(lhs.abs()).max(1.0);
        Self::new(suite, instance, lhs, rhs, achieved, Status::from_bool(ok), seed)
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:e},{:e},{:e},{},{}",
            quote(&self.suite),
            quote(&self.instance),
            self.lhs,
            self.rhs,
            self.achieved_constant,
            self.status,
            self.seed
        )
    }
}

/// Header plus one row per report.
pub fn to_csv(reports: &[CheckReport]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in reports {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// Worst status over a set of reports; `Pass` when empty.
pub fn overall(reports: &[CheckReport]) -> Status {
    reports.iter().fold(Status::Pass, |acc, r| acc.and(r.status))
}
