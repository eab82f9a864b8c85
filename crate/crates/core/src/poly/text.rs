//! Line-oriented PTF text format.
//!
//! ```text
//! PTF v1
//! n=3 theta=0e0
//! # comment
//! 1.0000000000000000e0 : 0 1
//! -5.0000000000000000e-1 :
//! ```
//!
//! Term lines are `<coefficient> : <indices>`, indices non-decreasing with
//! repeats as multiplicity; an empty index list is the constant term.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::{Monomial, Polynomial, Ptf};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const HEADER: &str = "PTF v1";

fn format_scalar<T: Scalar>(v: T) -> String {
    format!("{:.*e}", T::ROUND_TRIP_DIGITS - 1, v)
}

pub fn serialize_ptf<T: Scalar>(f: &Ptf<T>) -> String {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "n={} theta={}", f.poly.n(), format_scalar(f.theta)).unwrap();
    for (m, &c) in f.poly.terms() {
        let idx: Vec<String> = m.indices().iter().map(usize::to_string).collect();
        if idx.is_empty() {
            writeln!(out, "{} :", format_scalar(c)).unwrap();
        } else {
            writeln!(out, "{} : {}", format_scalar(c), idx.join(" ")).unwrap();
        }
    }
    out
}

/// Writes `P` as a PTF with `θ = 0`.
pub fn serialize_polynomial<T: Scalar>(p: &Polynomial<T>) -> String {
    serialize_ptf(&Ptf::new(p.clone(), T::zero()))
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_finite<T: Scalar>(s: &str, line: usize, what: &str) -> Result<T> {
    let v: T = s
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what} '{}'", s.trim())))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite {what}")));
    }
    Ok(v)
}

pub fn parse_ptf<T: Scalar>(text: &str) -> Result<Ptf<T>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    if header != HEADER {
        return Err(parse_err(ln, format!("expected header '{HEADER}'")));
    }

    let (ln, params) = lines.next().ok_or_else(|| parse_err(ln + 1, "missing 'n=.. theta=..' line"))?;
    let mut n = None;
    let mut theta = None;
    for field in params.split_whitespace() {
        match field.split_once('=') {
            Some(("n", v)) => {
                n = Some(v.parse::<usize>().map_err(|_| parse_err(ln, format!("invalid n '{v}'")))?)
            }
            Some(("theta", v)) => theta = Some(parse_finite::<T>(v, ln, "theta")?),
            _ => return Err(parse_err(ln, format!("unexpected header field '{field}'"))),
        }
    }
    let n = n.ok_or_else(|| parse_err(ln, "missing n="))?;
    let theta = theta.ok_or_else(|| parse_err(ln, "missing theta="))?;

    let mut seen = BTreeSet::new();
    let mut poly = Polynomial::zero(n);
    for (ln, line) in lines {
        let (coef, idx) = line
            .split_once(':')
            .ok_or_else(|| parse_err(ln, "expected '<coefficient> : <indices>'"))?;
        let c: T = parse_finite(coef, ln, "coefficient")?;
        let indices = idx
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| parse_err(ln, format!("invalid index '{t}'"))))
            .collect::<Result<Vec<_>>>()?;
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(parse_err(ln, format!("index {bad} >= n = {n}")));
        }
        let m = Monomial::from_sorted_indices(&indices)
            .map_err(|_| parse_err(ln, "indices not sorted ascending"))?;
        if !seen.insert(m.clone()) {
            return Err(parse_err(ln, format!("duplicate monomial {m}")));
        }
        poly.add_term(m, c).map_err(|e| parse_err(ln, e.to_string()))?;
    }
    Ok(Ptf::new(poly, theta))
}

pub fn parse_polynomial<T: Scalar>(text: &str) -> Result<Polynomial<T>> {
    Ok(parse_ptf::<T>(text)?.poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{random_ptf, CoefficientModel};

    #[test]
    fn round_trip_small() {
        let mut p = Polynomial::zero(2);
        p.add_term(Monomial::from_set([0, 1]), 1.0).unwrap();
        p.add_term(Monomial::one(), -0.5).unwrap();
        let f = Ptf::new(p, 0.0);
        let text = serialize_ptf(&f);
        assert_eq!(text.lines().count(), 4);
        assert_eq!(parse_ptf::<f64>(&text).unwrap(), f);
    }

    #[test]
    fn seventeen_digit_coefficient_is_bit_exact() {
        let c: f64 = "0.1000000000000000055511151231257827".parse().unwrap();
        let mut p = Polynomial::zero(1);
        p.add_term(Monomial::from_set([0]), c).unwrap();
        let back = parse_polynomial::<f64>(&serialize_polynomial(&p)).unwrap();
        let got = back.coefficient(&Monomial::from_set([0]));
        assert_eq!(got.to_bits(), c.to_bits());
    }

    #[test]
    fn f32_round_trip() {
        let f: Ptf<f32> = random_ptf(5, 3, CoefficientModel::UnitGaussian, 4).unwrap();
        assert_eq!(parse_ptf::<f32>(&serialize_ptf(&f)).unwrap(), f);
    }

    #[test]
    fn rejects_malformed_input() {
        let cases = [
            ("PTF v2\nn=2 theta=0\n", 1),
            ("PTF v1\nn=2\n", 2),
            ("PTF v1\nn=3 theta=0\n1 : 2 1\n", 3),
            ("PTF v1\nn=3 theta=0\n1 : 0 1\n2 : 0 1\n", 4),
            ("PTF v1\nn=3 theta=0\n1 : 3\n", 3),
            ("PTF v1\nn=3 theta=0\ninf : 1\n", 3),
            ("PTF v1\nn=3 theta=0\nNaN : 1\n", 3),
            ("PTF v1\nn=3 theta=0\n1.0 1\n", 3),
        ];
        for (text, line) in cases {
            match parse_ptf::<f64>(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn comments_and_multiplicity() {
        let text = "# leading\nPTF v1 # header\nn=2 theta=0.5\n\n2 : 0 0 1 # x0^2 x1\n";
        let f = parse_ptf::<f64>(text).unwrap();
        assert_eq!(f.theta, 0.5);
        let m = Monomial::from_sorted_indices(&[0, 0, 1]).unwrap();
        assert_eq!(f.poly.coefficient(&m), 2.0);
    }
}
