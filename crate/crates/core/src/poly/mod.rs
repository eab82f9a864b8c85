//! Sparse multivariate polynomials and polynomial threshold functions.

mod compiled;
mod monomial;
mod random;
mod text;

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

pub use compiled::{CompiledPolynomial, CompiledPtf};
pub use monomial::Monomial;
pub use random::{random_polynomial, random_ptf, CoefficientModel};
pub(crate) use random::for_each_subset;
pub use text::{parse_polynomial, parse_ptf, serialize_polynomial, serialize_ptf};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// `P = Σ a_I X^I` over variables `x_0 .. x_{n-1}`. Zero coefficients are
/// never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T: Scalar = f64> {
    n: usize,
    terms: BTreeMap<Monomial, T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: T) -> Self {
        let mut p = Self::zero(n);
        p.add_term(Monomial::one(), c).expect("constant term");
        p
    }

    /// Collects terms, summing repeated monomials and dropping zeros.
    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Monomial, T)>) -> Result<Self> {
        let mut p = Self::zero(n);
        for (m, c) in terms {
            p.add_term(m, c)?;
        }
        Ok(p)
    }

    /// `Σ coeffs[i] x_i`.
    pub fn linear(coeffs: &[T]) -> Self {
        let terms = coeffs.iter().enumerate().map(|(i, &c)| (Monomial::from_set([i]), c));
        Self::from_terms(coeffs.len(), terms).expect("indices in range")
    }

    /// `Σ_i x_i`, the polynomial behind the majority function.
    pub fn majority(n: usize) -> Self {
        Self::linear(&vec![T::one(); n])
    }

    pub fn add_term(&mut self, m: Monomial, c: T) -> Result<()> {
        if let Some(v) = m.max_variable() {
            if v >= self.n {
                return Err(Error::IndexOutOfRange { index: v, n: self.n });
            }
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                if !c.is_zero() {
                    e.insert(c);
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, T> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximum term degree; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_multilinear(&self) -> bool {
        self.terms.keys().all(Monomial::is_multilinear)
    }

    pub fn coefficient(&self, m: &Monomial) -> T {
        self.terms.get(m).copied().unwrap_or_else(T::zero)
    }

    pub fn constant_term(&self) -> T {
        self.coefficient(&Monomial::one())
    }

    /// True when no term involves a variable.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_constant)
    }

    pub fn evaluate(&self, x: &[T]) -> Result<T> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok(self.evaluate_unchecked(x))
    }

    /// Evaluation without the length check; `x` must cover every variable.
    pub fn evaluate_unchecked(&self, x: &[T]) -> T {
        let mut total = T::zero();
        for (m, &c) in &self.terms {
            let mut term = c;
            for &(v, k) in m.entries() {
                term *= x[v].powi(k as i32);
            }
            total += term;
        }
        total
    }

    /// `‖P‖² = Σ a_I²` (hypercube or Gaussian measure); multilinear only.
    pub fn norm_sq(&self) -> Result<T> {
        if !self.is_multilinear() {
            return Err(Error::NotMultilinear);
        }
        Ok(self.terms.values().map(|&c| c * c).sum())
    }

    /// Variance `‖P‖² - E[P]²` of a multilinear polynomial on the cube.
    pub fn variance(&self) -> Result<T> {
        if !self.is_multilinear() {
            return Err(Error::NotMultilinear);
        }
        Ok(self
            .terms
            .iter()
            .filter(|(m, _)| !m.is_constant())
            .map(|(_, &c)| c * c)
            .sum())
    }

    /// Substitutes ±1 values; remaining variables keep their indices.
    pub fn restrict(&self, r: &Restriction) -> Result<Self> {
        if let Some(&v) = r.assignments.keys().next_back() {
            if v >= self.n {
                return Err(Error::IndexOutOfRange { index: v, n: self.n });
            }
        }
        let mut out = Self::zero(self.n);
        for (m, &c) in &self.terms {
            let mut coeff = c;
            let mut kept = Vec::with_capacity(m.entries().len());
            for &(v, k) in m.entries() {
                match r.get(v) {
                    Some(s) => {
                        if s < 0 && k % 2 == 1 {
                            coeff = -coeff;
                        }
                    }
                    None => kept.push((v, k)),
                }
            }
            out.add_term(Monomial::new(kept).expect("subset of a valid monomial"), coeff)?;
        }
        Ok(out)
    }

    /// Multilinear reduction on the cube (`x_i^2 = 1`).
    pub fn multilinearize(&self) -> Self {
        let terms = self.terms.iter().map(|(m, &c)| {
            (Monomial::from_set(m.entries().iter().filter(|e| e.1 % 2 == 1).map(|e| e.0)), c)
        });
        Self::from_terms(self.n, terms).expect("same variables")
    }

    pub fn scale(&self, s: T) -> Self {
        let terms = self.terms.iter().map(|(m, &c)| (m.clone(), c * s));
        Self::from_terms(self.n, terms).expect("same variables")
    }

    /// Same terms over a larger variable count.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::from_terms(n, self.terms.iter().map(|(m, &c)| (m.clone(), c)))
    }

    /// Variables appearing in some term.
    pub fn support(&self) -> Vec<usize> {
        let mut vars: Vec<usize> = self.terms.keys().flat_map(|m| m.variables()).collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    pub fn cast<U: Scalar>(&self) -> Polynomial<U> {
        Polynomial {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| (m.clone(), U::from_f64_lossy(c.as_f64())))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }
}

impl<T: Scalar> std::ops::Add for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn add(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        let n = self.n.max(rhs.n);
        let terms = self.terms.iter().chain(rhs.terms.iter()).map(|(m, &c)| (m.clone(), c));
        Polynomial::from_terms(n, terms).expect("indices below max n")
    }
}

impl<T: Scalar> std::ops::Sub for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn sub(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        self + &rhs.scale(-T::one())
    }
}

impl<T: Scalar> std::ops::Mul for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn mul(self, rhs: &Polynomial<T>) -> Polynomial<T> {
        let n = self.n.max(rhs.n);
        let mut out = Polynomial::zero(n);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &rhs.terms {
                out.add_term(a.mul(b), ca * cb).expect("indices below max n");
            }
        }
        out
    }
}

impl<T: Scalar> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*{m}")?;
        }
        Ok(())
    }
}

/// `f(x) = sign(P(x) - θ)` with `sign(0) = +1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ptf<T: Scalar = f64> {
    pub poly: Polynomial<T>,
    pub theta: T,
}

impl<T: Scalar> Ptf<T> {
    pub fn new(poly: Polynomial<T>, theta: T) -> Self {
        Self { poly, theta }
    }

    pub fn n(&self) -> usize {
        self.poly.n()
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    /// Majority of `n` bits, `sign(Σ x_i)`.
    pub fn majority(n: usize) -> Self {
        Self::new(Polynomial::majority(n), T::zero())
    }

    /// `sign(x_i)` over `n` variables.
    pub fn dictator(n: usize, i: usize) -> Self {
        let mut p = Polynomial::zero(n);
        p.add_term(Monomial::from_set([i]), T::one()).expect("i < n");
        Self::new(p, T::zero())
    }

    pub fn evaluate(&self, x: &[T]) -> Result<i8> {
        Ok(sign(self.poly.evaluate(x)? - self.theta))
    }

    pub fn evaluate_unchecked(&self, x: &[T]) -> i8 {
        sign(self.poly.evaluate_unchecked(x) - self.theta)
    }

    pub fn restrict(&self, r: &Restriction) -> Result<Self> {
        Ok(Self::new(self.poly.restrict(r)?, self.theta))
    }

    /// Divides `P` and `θ` by `‖P‖` (multilinear); the function is unchanged.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.poly.norm_sq()?.sqrt();
        if norm.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(Self::new(self.poly.scale(norm.recip()), self.theta / norm))
    }
}

/// `sign` with `sign(0) = +1`.
pub fn sign<T: Scalar>(v: T) -> i8 {
    if v >= T::zero() {
        1
    } else {
        -1
    }
}

/// Partial assignment of ±1 values to variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Restriction {
    assignments: BTreeMap<usize, i8>,
}

impl Restriction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, i8)>) -> Result<Self> {
        let mut r = Self::new();
        for (v, s) in pairs {
            r.assign(v, s)?;
        }
        Ok(r)
    }

    pub fn assign(&mut self, var: usize, value: i8) -> Result<()> {
        if value != 1 && value != -1 {
            return Err(invalid(format!("restriction value {value} is not ±1")));
        }
        self.assignments.insert(var, value);
        Ok(())
    }

    pub fn get(&self, var: usize) -> Option<i8> {
        self.assignments.get(&var).copied()
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, i8)> + '_ {
        self.assignments.iter().map(|(&v, &s)| (v, s))
    }

    /// Copies `y` and overwrites the assigned coordinates.
    pub fn merge<T: Scalar>(&self, y: &[T]) -> Vec<T> {
        let mut x = y.to_vec();
        for (v, s) in self.iter() {
            x[v] = if s > 0 { T::one() } else { -T::one() };
        }
        x
    }

    /// Union; assignments in `other` take precedence.
    pub fn extended(&self, other: &Restriction) -> Restriction {
        let mut r = self.clone();
        r.assignments.extend(other.iter());
        r
    }

    /// `x3=+1,x5=-1`, or `-` when empty.
    pub fn label(&self) -> String {
        if self.is_empty() {
            return "-".to_string();
        }
        self.iter()
            .map(|(v, s)| format!("x{v}={}", if s > 0 { "+1" } else { "-1" }))
            .collect::<Vec<_>>()
            .join(",")
    }
}
