use super::{sign, Polynomial, Ptf};
use crate::scalar::Scalar;

/// Flat, cache-friendly copy of a polynomial for repeated evaluation,
/// with an index from variables to the terms that contain them.
#[derive(Clone, Debug)]
pub struct CompiledPolynomial<T: Scalar = f64> {
    n: usize,
    coeffs: Vec<T>,
    // Term t uses entries[offsets[t]..offsets[t + 1]].
    offsets: Vec<u32>,
    vars: Vec<u32>,
    powers: Vec<u32>,
    multilinear: bool,
    by_var_offsets: Vec<u32>,
    by_var: Vec<u32>,
}

impl<T: Scalar> CompiledPolynomial<T> {
    pub fn new(p: &Polynomial<T>) -> Self {
        let mut coeffs = Vec::with_capacity(p.len());
        let mut offsets = vec![0u32];
        let mut vars = Vec::new();
        let mut powers = Vec::new();
        let mut counts = vec![0u32; p.n() + 1];
        for (m, &c) in p.terms() {
            coeffs.push(c);
            for &(v, k) in m.entries() {
                vars.push(v as u32);
                powers.push(k);
                counts[v + 1] += 1;
            }
            offsets.push(vars.len() as u32);
        }
        for v in 0..p.n() {
            counts[v + 1] += counts[v];
        }
        let by_var_offsets = counts.clone();
        let mut fill = counts;
        let mut by_var = vec![0u32; vars.len()];
        for t in 0..coeffs.len() {
            for &v in &vars[offsets[t] as usize..offsets[t + 1] as usize] {
                let v = v as usize;
                by_var[fill[v] as usize] = t as u32;
                fill[v] += 1;
            }
        }
        Self {
            n: p.n(),
            coeffs,
            offsets,
            vars,
            powers,
            multilinear: p.is_multilinear(),
            by_var_offsets,
            by_var,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_multilinear(&self) -> bool {
        self.multilinear
    }

    fn term(&self, t: usize, x: &[T]) -> T {
        let mut v = self.coeffs[t];
        let range = self.offsets[t] as usize..self.offsets[t + 1] as usize;
        if self.multilinear {
            for e in range {
                v *= x[self.vars[e] as usize];
            }
        } else {
            for e in range {
                v *= x[self.vars[e] as usize].powi(self.powers[e] as i32);
            }
        }
        v
    }

    pub fn evaluate(&self, x: &[T]) -> T {
        let mut total = T::zero();
        for t in 0..self.coeffs.len() {
            total += self.term(t, x);
        }
        total
    }

    /// For a multilinear polynomial and a ±1 point `x`, the value after
    /// negating the coordinates in `flipped` (distinct indices), given the
    /// value `before` at `x`. `mark` is scratch of length `n`, all false on
    /// entry and on return.
    pub fn value_after_flips(
        &self,
        x: &[T],
        before: T,
        flipped: &[usize],
        mark: &mut [bool],
    ) -> T {
        debug_assert!(self.multilinear);
        for &i in flipped {
            mark[i] = true;
        }
        let two = T::one() + T::one();
        let mut value = before;
        for &i in flipped {
            for &t in &self.by_var[self.by_var_offsets[i] as usize..self.by_var_offsets[i + 1] as usize] {
                let range = self.offsets[t as usize] as usize..self.offsets[t as usize + 1] as usize;
                // Handle each term once: at its first flipped variable.
                let first = range.clone().map(|e| self.vars[e] as usize).find(|&v| mark[v]);
                if first != Some(i) {
                    continue;
                }
                let odd = range.filter(|&e| mark[self.vars[e] as usize]).count() % 2 == 1;
                if odd {
                    value -= two * self.term(t as usize, x);
                }
            }
        }
        for &i in flipped {
            mark[i] = false;
        }
        value
    }
}

/// Compiled threshold function.
#[derive(Clone, Debug)]
pub struct CompiledPtf<T: Scalar = f64> {
    pub poly: CompiledPolynomial<T>,
    pub theta: T,
}

impl<T: Scalar> CompiledPtf<T> {
    pub fn new(f: &Ptf<T>) -> Self {
        Self { poly: CompiledPolynomial::new(&f.poly), theta: f.theta }
    }

    pub fn evaluate(&self, x: &[T]) -> i8 {
        sign(self.poly.evaluate(x) - self.theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{random_polynomial, CoefficientModel, Monomial};

    #[test]
    fn matches_tree_evaluation() {
        let p = random_polynomial::<f64>(7, 3, CoefficientModel::UnitGaussian, 4).unwrap();
        let c = CompiledPolynomial::new(&p);
        let x = [1.0, -1.0, 0.5, 2.0, -0.25, 1.0, 3.0];
        assert!((c.evaluate(&x) - p.evaluate(&x).unwrap()).abs() < 1e-12);
        let q = Polynomial::<f64>::from_terms(2, [(Monomial::new(vec![(0, 2), (1, 3)]).unwrap(), 1.5)]).unwrap();
        let cq = CompiledPolynomial::new(&q);
        assert!((cq.evaluate(&[2.0, -1.0]) + 6.0).abs() < 1e-12);
    }

    #[test]
    fn incremental_flips() {
        let p = random_polynomial::<f64>(8, 3, CoefficientModel::UnitGaussian, 5).unwrap();
        let c = CompiledPolynomial::new(&p);
        let mut mark = vec![false; 8];
        let x: Vec<f64> = (0..8).map(|i| if i % 3 == 0 { 1.0 } else { -1.0 }).collect();
        let before = c.evaluate(&x);
        for flipped in [vec![], vec![2], vec![0, 5], vec![1, 3, 4, 7]] {
            let mut z = x.clone();
            for &i in &flipped {
                z[i] = -z[i];
            }
            let got = c.value_after_flips(&x, before, &flipped, &mut mark);
            assert!((got - c.evaluate(&z)).abs() < 1e-10, "{flipped:?}");
            assert!(mark.iter().all(|m| !m));
        }
    }
}
