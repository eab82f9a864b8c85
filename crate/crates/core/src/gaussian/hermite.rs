use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial};
use crate::scalar::Scalar;

/// Orthonormal (probabilists') Hermite polynomial `H_k(x)`, by
/// `√(k+1) H_{k+1} = x H_k − √k H_{k−1}`.
pub fn hermite_univariate<T: Scalar>(k: u32, x: T) -> T {
    let mut prev = T::zero();
    let mut cur = T::one();
    for j in 0..k {
        let jf = T::from_u32(j).expect("small integer");
        let next = (x * cur - jf.sqrt() * prev) / (jf + T::one()).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// `H_0(x), …, H_k(x)`.
pub fn hermite_table<T: Scalar>(k: u32, x: T) -> Vec<T> {
    let mut out = Vec::with_capacity(k as usize + 1);
    out.push(T::one());
    if k >= 1 {
        out.push(x);
    }
    for j in 1..k {
        let jf = T::from_u32(j).expect("small integer");
        let next = (x * out[j as usize] - jf.sqrt() * out[j as usize - 1]) / (jf + T::one()).sqrt();
        out.push(next);
    }
    out
}

/// `H'_k(x) = √k H_{k−1}(x)`.
pub fn hermite_derivative<T: Scalar>(k: u32, x: T) -> T {
    if k == 0 {
        return T::zero();
    }
    T::from_u32(k).expect("small integer").sqrt() * hermite_univariate(k - 1, x)
}

/// `H_S(x) = Π_v H_{s_v}(x_v)` for the multiset `S`.
pub fn hermite_multi<T: Scalar>(s: &Monomial, x: &[T]) -> T {
    s.entries().iter().fold(T::one(), |acc, &(v, k)| acc * hermite_univariate(k, x[v]))
}

fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |a, j| a * j as f64)
}

/// `x^k = Σ_j c_j H_j`, as `(j, c_j)` pairs.
fn power_in_hermite(k: u32) -> Vec<(u32, f64)> {
    (0..=k / 2)
        .map(|m| {
            let j = k - 2 * m;
            let c = factorial(k) / (factorial(m) * factorial(j) * 2f64.powi(m as i32));
            (j, c * factorial(j).sqrt())
        })
        .collect()
}

/// `H_k = Σ_j c_j x^j`, as `(j, c_j)` pairs.
fn hermite_in_power(k: u32) -> Vec<(u32, f64)> {
    let norm = factorial(k).sqrt();
    (0..=k / 2)
        .map(|m| {
            let j = k - 2 * m;
            let c = factorial(k) / (factorial(m) * factorial(j) * 2f64.powi(m as i32));
            (j, if m % 2 == 0 { c } else { -c } / norm)
        })
        .collect()
}

/// Per-variable change of basis applied to every term; `table(k)` gives
/// the image of the `k`-th basis element of one variable.
fn change_basis<T: Scalar>(
    terms: &BTreeMap<Monomial, T>,
    table: impl Fn(u32) -> Vec<(u32, f64)>,
) -> BTreeMap<Monomial, T> {
    let mut out: BTreeMap<Monomial, T> = BTreeMap::new();
    for (m, &c) in terms {
        let mut partial: Vec<(Vec<(usize, u32)>, f64)> = vec![(Vec::new(), 1.0)];
        for &(v, k) in m.entries() {
            let image = table(k);
            let mut next = Vec::with_capacity(partial.len() * image.len());
            for (entries, w) in &partial {
                for &(j, cj) in &image {
                    let mut e = entries.clone();
                    if j > 0 {
                        e.push((v, j));
                    }
                    next.push((e, w * cj));
                }
            }
            partial = next;
        }
        for (entries, w) in partial {
            let key = Monomial::new(entries).expect("variables ascending");
            *out.entry(key).or_insert_with(T::zero) += c * T::from_f64_lossy(w);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Coefficients of a polynomial in the orthonormal Hermite basis `H_S`,
/// keyed by the multiset `S` written as a monomial.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteExpansion<T: Scalar = f64> {
    n: usize,
    coeffs: BTreeMap<Monomial, T>,
}

impl<T: Scalar> HermiteExpansion<T> {
    pub fn new(p: &Polynomial<T>) -> Self {
        Self { n: p.n(), coeffs: change_basis(p.terms(), power_in_hermite) }
    }

    pub fn from_coefficients(n: usize, coeffs: impl IntoIterator<Item = (Monomial, T)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (m, c) in coeffs {
            if let Some(v) = m.max_variable() {
                if v >= n {
                    return Err(Error::IndexOutOfRange { index: v, n });
                }
            }
            *map.entry(m).or_insert_with(T::zero) += c;
        }
        map.retain(|_, c: &mut T| !c.is_zero());
        Ok(Self { n, coeffs: map })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &BTreeMap<Monomial, T> {
        &self.coeffs
    }

    pub fn coefficient(&self, s: &Monomial) -> T {
        self.coeffs.get(s).copied().unwrap_or_else(T::zero)
    }

    /// Back to the monomial basis.
    pub fn to_polynomial(&self) -> Polynomial<T> {
        let terms = change_basis(&self.coeffs, hermite_in_power);
        Polynomial::from_terms(self.n, terms).expect("same variables")
    }

    /// `‖P‖² = E[P(X)²] = Σ_S P̂_S²` under the standard Gaussian.
    pub fn norm_sq(&self) -> T {
        self.coeffs.values().map(|&c| c * c).sum()
    }

    pub fn evaluate(&self, x: &[T]) -> T {
        self.coeffs.iter().map(|(s, &c)| c * hermite_multi(s, x)).sum()
    }

    /// `E[(P(Z) − P(X))²] = Σ_S P̂_S² · 2(1 − (1−δ)^{|S|})` for a
    /// `δ`-correlated Gaussian pair.
    pub fn perturbation_norm_sq(&self, delta: f64) -> f64 {
        let rho = 1.0 - delta;
        self.coeffs
            .iter()
            .map(|(s, &c)| {
                let c = c.as_f64();
                c * c * 2.0 * (1.0 - rho.powi(s.degree() as i32))
            })
            .sum()
    }
}

pub fn hermite_expand<T: Scalar>(p: &Polynomial<T>) -> HermiteExpansion<T> {
    HermiteExpansion::new(p)
}

/// `E[P(X)²]` for standard Gaussian `X`.
pub fn norm_sq_gaussian<T: Scalar>(p: &Polynomial<T>) -> T {
    HermiteExpansion::new(p).norm_sq()
}

/// `H_S(z)` by Taylor expansion about `x`:
/// `Π_v Σ_j √(s_v!/(s_v−j)!) H_{s_v−j}(x_v) (z_v−x_v)^j / j!`.
pub fn hermite_taylor<T: Scalar>(s: &Monomial, x: &[T], z: &[T]) -> T {
    s.entries().iter().fold(T::one(), |acc, &(v, k)| {
        let h = hermite_table(k, x[v]);
        let d = z[v] - x[v];
        let mut sum = T::zero();
        let mut dpow = T::one();
        for j in 0..=k {
            let c = (factorial(k) / factorial(k - j)).sqrt() / factorial(j);
            sum += T::from_f64_lossy(c) * h[(k - j) as usize] * dpow;
            dpow *= d;
        }
        acc * sum
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(e: &[(usize, u32)]) -> Monomial {
        Monomial::new(e.to_vec()).unwrap()
    }

    #[test]
    fn base_cases() {
        for x in [-2.0, -0.3, 0.0, 1.7] {
            assert_eq!(hermite_univariate(0, x), 1.0);
            assert_eq!(hermite_univariate(1, x), x);
        }
        assert!((hermite_univariate(2, 2.0f64) - 3.0 / 2f64.sqrt()).abs() < 1e-15);
        // He_3(x) = x³ − 3x
        let x = 1.3f64;
        assert!((hermite_univariate(3, x) - (x.powi(3) - 3.0 * x) / 6f64.sqrt()).abs() < 1e-14);
        let t = hermite_table(6, x);
        for k in 0..=6 {
            assert!((t[k as usize] - hermite_univariate(k, x)).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_identity() {
        let h = 1e-5;
        for k in 0..=6u32 {
            for i in 0..=12 {
                let x = -3.0 + 0.5 * i as f64;
                let fd = (hermite_univariate(k, x + h) - hermite_univariate(k, x - h)) / (2.0 * h);
                assert!((fd - hermite_derivative(k, x)).abs() <= 1e-8 * (1.0 + fd.abs()), "k={k} x={x}");
            }
        }
    }

    #[test]
    fn expansion_examples() {
        let e = hermite_expand(&Polynomial::<f64>::linear(&[1.0]));
        assert_eq!(e.coefficient(&mono(&[(0, 1)])), 1.0);
        let sq = Polynomial::from_terms(1, [(mono(&[(0, 2)]), 1.0)]).unwrap();
        let e = hermite_expand(&sq);
        assert!((e.coefficient(&mono(&[(0, 2)])) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(e.coefficient(&Monomial::one()), 1.0);
        assert!((norm_sq_gaussian(&sq) - 3.0).abs() < 1e-12);
        let p = Polynomial::from_terms(2, [(mono(&[(0, 1), (1, 1)]), 1.0), (Monomial::one(), 3.0)]).unwrap();
        let e = hermite_expand(&p);
        assert_eq!(e.coeffs().len(), 2);
        assert_eq!(e.coefficient(&mono(&[(0, 1), (1, 1)])), 1.0);
        assert_eq!(e.coefficient(&Monomial::one()), 3.0);
        assert_eq!(norm_sq_gaussian(&Polynomial::<f64>::linear(&[1.0, 1.0])), 2.0);
    }

    #[test]
    fn round_trip_general_polynomial() {
        let p = Polynomial::<f64>::from_terms(
            3,
            [
                (mono(&[(0, 4)]), 0.5),
                (mono(&[(0, 1), (1, 3)]), -1.25),
                (mono(&[(1, 2), (2, 2)]), 2.0),
                (mono(&[(2, 1)]), 0.75),
                (Monomial::one(), -3.0),
            ],
        )
        .unwrap();
        let back = hermite_expand(&p).to_polynomial();
        for (m, &c) in p.terms() {
            assert!((back.coefficient(m) - c).abs() < 1e-9, "{m}");
        }
        for (m, &c) in back.terms() {
            assert!((p.coefficient(m) - c).abs() < 1e-9, "{m}");
        }
        let e = hermite_expand(&p);
        for x in [[0.3f64, -1.1, 2.0], [-0.7, 0.2, 0.0]] {
            assert!((e.evaluate(&x) - p.evaluate(&x).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn perturbation_closed_form() {
        let e = hermite_expand(&Polynomial::<f64>::linear(&[1.0]));
        assert!((e.perturbation_norm_sq(0.1) - 0.2).abs() < 1e-15);
        let c = hermite_expand(&Polynomial::<f64>::constant(2, 4.0));
        assert_eq!(c.perturbation_norm_sq(0.3), 0.0);
        let h3 = HermiteExpansion::from_coefficients(1, [(mono(&[(0, 3)]), 1.0)]).unwrap();
        assert!((h3.perturbation_norm_sq(0.1) - 0.542).abs() < 1e-12);
    }

    #[test]
    fn taylor_matches_direct() {
        let s = mono(&[(0, 2), (1, 1)]);
        let x = [0.4f64, -1.2];
        let z = [1.9, 0.3];
        assert!((hermite_taylor(&s, &x, &z) - hermite_multi(&s, &z)).abs() < 1e-12);
    }
}
