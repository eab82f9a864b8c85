use crate::error::{Error, Result};
use crate::limits::check_exact;
use crate::poly::{sign, Polynomial, Ptf};
use crate::scalar::Scalar;

/// Unnormalized in-place Walsh–Hadamard transform in natural order:
/// `out[S] = Σ_y in[y] (-1)^{|S ∧ y|}`. Length must be a power of two.
pub fn walsh_hadamard<T: Scalar>(a: &mut [T]) {
    debug_assert!(a.len().is_power_of_two());
    let mut h = 1;
    while h < a.len() {
        for block in a.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (u, v) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*u, *v);
                *u = x + y;
                *v = x - y;
            }
        }
        h *= 2;
    }
}

/// The point encoded by table index `i`: bit `b` set means `x_b = +1`.
pub fn point<T: Scalar>(n: usize, i: usize) -> Vec<T> {
    (0..n).map(|b| if (i >> b) & 1 == 1 { T::one() } else { -T::one() }).collect()
}

/// `P(x)` at every cube point, indexed by the table convention, in
/// `O(n 2^n)` through one Walsh–Hadamard transform of the coefficients.
pub fn cube_values<T: Scalar>(p: &Polynomial<T>) -> Result<Vec<T>> {
    if !p.is_multilinear() {
        return Err(Error::NotMultilinear);
    }
    let n = p.n();
    check_exact(n)?;
    let size = 1usize << n;
    let full = size - 1;
    let mut coeffs = vec![T::zero(); size];
    for (m, &c) in p.terms() {
        coeffs[m.mask().expect("multilinear, n <= limit") as usize] = c;
    }
    // χ_S(x) = (-1)^{|S \ x|}, so the transform lands at the complement index.
    walsh_hadamard(&mut coeffs);
    Ok((0..size).map(|x| coeffs[full ^ x]).collect())
}

/// Sign table of a Boolean function on `{±1}^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthTable {
    n: usize,
    signs: Vec<i8>,
}

impl TruthTable {
    pub fn from_ptf<T: Scalar>(f: &Ptf<T>) -> Result<Self> {
        let values = cube_values(&f.poly)?;
        Ok(Self { n: f.n(), signs: values.into_iter().map(|v| sign(v - f.theta)).collect() })
    }

    pub fn from_signs(n: usize, signs: Vec<i8>) -> Result<Self> {
        check_exact(n)?;
        if signs.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: signs.len() });
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(crate::error::invalid("truth table entries must be ±1"));
        }
        Ok(Self { n, signs })
    }

    /// Tabulates an arbitrary ±1-valued function of the point.
    pub fn from_fn(n: usize, f: impl Fn(&[f64]) -> i8) -> Result<Self> {
        check_exact(n)?;
        let signs = (0..1usize << n).map(|i| f(&point::<f64>(n, i))).collect();
        Self::from_signs(n, signs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn get(&self, index: usize) -> i8 {
        self.signs[index]
    }

    /// True when flipping `x_i` never changes the value.
    pub fn independent_of(&self, i: usize) -> bool {
        let bit = 1usize << i;
        (0..self.signs.len()).all(|x| self.signs[x] == self.signs[x ^ bit])
    }

    /// Fraction of points where the value is `+1`.
    pub fn mean_positive(&self) -> f64 {
        self.signs.iter().filter(|&&s| s > 0).count() as f64 / self.signs.len() as f64
    }

    pub fn fourier_transform(&self) -> Spectrum {
        let size = self.signs.len();
        let full = size - 1;
        let mut a: Vec<f64> = (0..size).map(|y| self.signs[full ^ y] as f64).collect();
        walsh_hadamard(&mut a);
        let scale = 1.0 / size as f64;
        a.iter_mut().for_each(|v| *v *= scale);
        Spectrum { n: self.n, coeffs: a }
    }
}

/// Fourier coefficients `f̂(S)` indexed by subset bitmask.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    n: usize,
    coeffs: Vec<f64>,
}

impl Spectrum {
    pub fn new(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_exact(n)?;
        if coeffs.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: coeffs.len() });
        }
        Ok(Self { n, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn get(&self, mask: usize) -> f64 {
        self.coeffs[mask]
    }

    pub fn parseval_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// The multilinear expansion `Σ_S f̂(S) x^S`.
    pub fn to_polynomial(&self) -> Polynomial<f64> {
        let terms = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(s, &c)| (crate::poly::Monomial::from_mask(s as u64), c));
        Polynomial::from_terms(self.n, terms).expect("masks below n")
    }

    /// Evaluates the expansion on the cube; entries are rounded to ±1.
    pub fn inverse(&self) -> Result<TruthTable> {
        let size = self.coeffs.len();
        let full = size - 1;
        let mut a = self.coeffs.clone();
        walsh_hadamard(&mut a);
        let signs = (0..size).map(|x| if a[full ^ x] >= 0.0 { 1 } else { -1 }).collect();
        TruthTable::from_signs(self.n, signs)
    }

    /// Real values of the expansion at every cube point.
    pub fn inverse_values(&self) -> Vec<f64> {
        let size = self.coeffs.len();
        let full = size - 1;
        let mut a = self.coeffs.clone();
        walsh_hadamard(&mut a);
        (0..size).map(|x| a[full ^ x]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{random_ptf, CoefficientModel, Monomial};

    fn brute_coefficient(t: &TruthTable, s: usize) -> f64 {
        let n = t.n();
        (0..1usize << n)
            .map(|x| {
                let chi: f64 = point::<f64>(n, x)
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| (s >> b) & 1 == 1)
                    .map(|(_, v)| *v)
                    .product();
                t.get(x) as f64 * chi
            })
            .sum::<f64>()
            / (1 << n) as f64
    }

    #[test]
    fn dictator_and_constant_tables() {
        let t = TruthTable::from_ptf(&Ptf::<f64>::dictator(1, 0)).unwrap();
        assert_eq!(t.signs(), &[-1, 1]);
        let t = TruthTable::from_ptf(&Ptf::new(Polynomial::<f64>::zero(3), 1.0)).unwrap();
        assert!(t.signs().iter().all(|&s| s == -1));
    }

    #[test]
    fn majority3_table_and_spectrum() {
        let t = TruthTable::from_ptf(&Ptf::<f64>::majority(3)).unwrap();
        assert_eq!(t.signs().iter().filter(|&&s| s == 1).count(), 4);
        let s = t.fourier_transform();
        for mask in 0..8 {
            assert!((s.get(mask) - brute_coefficient(&t, mask)).abs() < 1e-15);
        }
        assert_eq!(s.get(0b001), 0.5);
        assert_eq!(s.get(0b010), 0.5);
        assert_eq!(s.get(0b100), 0.5);
        assert_eq!(s.get(0b111), -0.5);
        assert_eq!(s.get(0b011), 0.0);
    }

    #[test]
    fn dictator_spectrum() {
        let t = TruthTable::from_ptf(&Ptf::<f64>::dictator(3, 0)).unwrap();
        let s = t.fourier_transform();
        for mask in 0..8 {
            assert_eq!(s.get(mask), if mask == 1 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn cube_values_match_direct_evaluation() {
        for seed in 0..20 {
            let f: Ptf = random_ptf(7, 3, CoefficientModel::UnitGaussian, seed).unwrap();
            let v = cube_values(&f.poly).unwrap();
            for (i, vi) in v.iter().enumerate() {
                let direct = f.poly.evaluate(&point(7, i)).unwrap();
                assert!((vi - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_reconstructs_table() {
        for seed in 0..20 {
            let f: Ptf = random_ptf(8, 2, CoefficientModel::SignedUnit, seed).unwrap();
            let t = TruthTable::from_ptf(&f).unwrap();
            assert_eq!(t.fourier_transform().inverse().unwrap(), t);
            let p = t.fourier_transform().parseval_sum();
            assert!((p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_polynomial_interpolates() {
        let t = TruthTable::from_ptf(&Ptf::<f64>::majority(3)).unwrap();
        let p = t.fourier_transform().to_polynomial();
        assert_eq!(p.coefficient(&Monomial::from_set([0, 1, 2])), -0.5);
        for i in 0..8 {
            assert_eq!(p.evaluate(&point(3, i)).unwrap(), t.get(i) as f64);
        }
    }

    #[test]
    fn non_multilinear_rejected() {
        let mut p = Polynomial::<f64>::zero(1);
        p.add_term(Monomial::from_sorted_indices(&[0, 0]).unwrap(), 1.0).unwrap();
        assert_eq!(TruthTable::from_ptf(&Ptf::new(p, 0.0)), Err(Error::NotMultilinear));
    }
}
