use std::collections::BTreeMap;

use crate::error::{invalid, Error, Result};
use crate::poly::{Monomial, Polynomial, Restriction};
use crate::scalar::Scalar;

/// Coordinate weights `w_i² = Σ_{I∋i} a_I²` and their sorted tail sums.
///
/// `sorted_w_sq[k]` is the `(k+1)`-th largest weight and
/// `sigma_sq[k] = Σ_{j>=k} sorted_w_sq[j]`; in 1-based terms `σ_{k+1}²`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightProfile<T: Scalar = f64> {
    pub w_sq: Vec<T>,
    pub perm: Vec<usize>,
    pub sorted_w_sq: Vec<T>,
    pub sigma_sq: Vec<T>,
    /// `Σ w_i⁴ / σ_1⁴`.
    pub regular_stat: T,
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("epsilon {epsilon} must be positive")))
    }
}

impl<T: Scalar> WeightProfile<T> {
    pub fn new(p: &Polynomial<T>) -> Result<Self> {
        if !p.is_multilinear() {
            return Err(Error::NotMultilinear);
        }
        let mut w_sq = vec![T::zero(); p.n()];
        for (m, &c) in p.terms() {
            for v in m.variables() {
                w_sq[v] += c * c;
            }
        }
        Self::from_weights(w_sq)
    }

    /// Profile of `P` restricted by `r`, computed from `P`'s terms by
    /// grouping them on their unassigned part rather than building the
    /// restricted polynomial.
    pub fn of_restriction(p: &Polynomial<T>, r: &Restriction) -> Result<Self> {
        if !p.is_multilinear() {
            return Err(Error::NotMultilinear);
        }
        let mut q: BTreeMap<Monomial, T> = BTreeMap::new();
        for (m, &c) in p.terms() {
            let mut coeff = c;
            let mut free = Vec::new();
            for v in m.variables() {
                match r.get(v) {
                    Some(s) if s < 0 => coeff = -coeff,
                    Some(_) => {}
                    None => free.push(v),
                }
            }
            *q.entry(Monomial::from_set(free)).or_insert_with(T::zero) += coeff;
        }
        let mut w_sq = vec![T::zero(); p.n()];
        for (m, &c) in &q {
            for v in m.variables() {
                w_sq[v] += c * c;
            }
        }
        Self::from_weights(w_sq)
    }

    pub fn from_weights(w_sq: Vec<T>) -> Result<Self> {
        let n = w_sq.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by(|&a, &b| {
            w_sq[b].partial_cmp(&w_sq[a]).expect("finite weights").then(a.cmp(&b))
        });
        let sorted_w_sq: Vec<T> = perm.iter().map(|&i| w_sq[i]).collect();
        let mut sigma_sq = vec![T::zero(); n];
        let mut acc = T::zero();
        for k in (0..n).rev() {
            acc += sorted_w_sq[k];
            sigma_sq[k] = acc;
        }
        let total = sigma_sq.first().copied().unwrap_or_else(T::zero);
        if total.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let fourth: T = w_sq.iter().map(|&w| w * w).sum();
        Ok(Self { w_sq, perm, sorted_w_sq, sigma_sq, regular_stat: fourth / (total * total) })
    }

    pub fn n(&self) -> usize {
        self.w_sq.len()
    }

    /// `σ_1² = Σ_i w_i²`.
    pub fn total(&self) -> T {
        self.sigma_sq[0]
    }

    /// `Σ_{j>=k} sorted_w_sq[j]`, zero for `k >= n`.
    pub fn tail(&self, k: usize) -> T {
        self.sigma_sq.get(k).copied().unwrap_or_else(T::zero)
    }

    pub fn is_regular(&self, epsilon: f64) -> Result<bool> {
        check_epsilon(epsilon)?;
        let total = self.total();
        let fourth: T = self.w_sq.iter().map(|&w| w * w).sum();
        let eps = T::from_f64_lossy(epsilon);
        Ok(fourth <= eps * eps * total * total)
    }

    /// Smallest `ε'` for which the polynomial is `ε'`-regular.
    pub fn regularity(&self) -> f64 {
        self.regular_stat.as_f64().sqrt()
    }

    /// Least `k` such that every sorted weight after the first `k` is at
    /// most `ε² σ_{k+1}²`; `n` if none.
    pub fn critical_index(&self, epsilon: f64) -> Result<usize> {
        check_epsilon(epsilon)?;
        let eps2 = T::from_f64_lossy(epsilon * epsilon);
        // Sorted order: the largest remaining weight is sorted_w_sq[k].
        Ok((0..self.n())
            .find(|&k| self.sorted_w_sq[k] <= eps2 * self.sigma_sq[k])
            .unwrap_or(self.n()))
    }

    /// The first `k` variables in decreasing-weight order.
    pub fn top(&self, k: usize) -> &[usize] {
        &self.perm[..k.min(self.n())]
    }

    /// `σ_j² <= (1-ε²)^{j-i} σ_i²` for all `1 <= i < j < K` (1-based).
    pub fn sigma_decay_check(&self, epsilon: f64) -> Result<bool> {
        let k = self.critical_index(epsilon)?;
        let rate = 1.0 - epsilon * epsilon;
        for i in 1..k {
            let si = self.sigma_sq[i - 1].as_f64();
            for j in i + 1..k {
                let sj = self.sigma_sq[j - 1].as_f64();
                let bound = rate.powi((j - i) as i32) * si;
                if sj > bound * (1.0 + 1e-9) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

pub fn weight_profile<T: Scalar>(p: &Polynomial<T>) -> Result<WeightProfile<T>> {
    WeightProfile::new(p)
}

pub fn is_regular<T: Scalar>(p: &Polynomial<T>, epsilon: f64) -> Result<bool> {
    WeightProfile::new(p)?.is_regular(epsilon)
}

pub fn critical_index<T: Scalar>(p: &Polynomial<T>, epsilon: f64) -> Result<usize> {
    WeightProfile::new(p)?.critical_index(epsilon)
}

pub fn sigma_decay_check<T: Scalar>(p: &Polynomial<T>, epsilon: f64) -> Result<bool> {
    WeightProfile::new(p)?.sigma_decay_check(epsilon)
}

/// Measured sides of `σ_L² <= C (1-ε²)^{L-1} Σ_{∅≠I⊆top L} a_I²`, which
/// holds when `K(P,ε) >= L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailNormCheck {
    pub block: usize,
    pub sigma_l_sq: f64,
    pub inner_mass: f64,
    pub rate: f64,
    /// `σ_L² / ((1-ε²)^{L-1} · inner_mass)`.
    pub achieved: f64,
    /// `d / (1 - (d+1)(1-ε²)^{L-1})` when the denominator is positive.
    pub bound: Option<f64>,
}

impl TailNormCheck {
    pub fn passed(&self) -> bool {
        self.bound.is_none_or(|b| self.achieved <= b * (1.0 + 1e-9))
    }
}

/// Tail-norm measurement for block size `l`; `None` when `K(P,ε) < l`.
pub fn tail_norm_check<T: Scalar>(
    p: &Polynomial<T>,
    epsilon: f64,
    l: usize,
) -> Result<Option<TailNormCheck>> {
    let profile = WeightProfile::new(p)?;
    let k = profile.critical_index(epsilon)?;
    if l == 0 || k < l {
        return Ok(None);
    }
    let top = profile.top(l);
    let inner_mass: f64 = p
        .terms()
        .iter()
        .filter(|(m, _)| !m.is_constant() && m.variables().all(|v| top.contains(&v)))
        .map(|(_, &c)| (c * c).as_f64())
        .sum();
    let sigma_l_sq = profile.tail(l - 1).as_f64();
    let rate = (1.0 - epsilon * epsilon).powi(l as i32 - 1);
    let d = p.degree() as f64;
    let denom = 1.0 - (d + 1.0) * rate;
    Ok(Some(TailNormCheck {
        block: l,
        sigma_l_sq,
        inner_mass,
        rate,
        achieved: sigma_l_sq / (rate * inner_mass),
        bound: (denom > 0.0).then(|| d / denom),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(n: usize, t: &[(&[usize], f64)]) -> Polynomial {
        Polynomial::from_terms(
            n,
            t.iter().map(|(ix, c)| (Monomial::from_set(ix.iter().copied()), *c)),
        )
        .unwrap()
    }

    #[test]
    fn weight_examples() {
        let w = weight_profile(&poly(3, &[(&[0, 1], 1.0), (&[1, 2], 2.0)])).unwrap();
        assert_eq!(w.w_sq, vec![1.0, 5.0, 4.0]);
        assert_eq!(w.perm, vec![1, 2, 0]);
        let w = weight_profile(&poly(1, &[(&[0], 1.0)])).unwrap();
        assert_eq!(w.w_sq, vec![1.0]);
        assert_eq!(w.total(), 1.0);
        let w = weight_profile(&Polynomial::<f64>::majority(4)).unwrap();
        assert_eq!(w.w_sq, vec![1.0; 4]);
        assert_eq!(w.sigma_sq, vec![4.0, 3.0, 2.0, 1.0]);
        assert_eq!(w.perm, vec![0, 1, 2, 3]);
        assert_eq!(weight_profile(&Polynomial::<f64>::zero(2)), Err(Error::ZeroPolynomial));
        assert_eq!(
            weight_profile(&Polynomial::<f64>::constant(2, 3.0)),
            Err(Error::ZeroPolynomial)
        );
    }

    #[test]
    fn regularity_examples() {
        let dictator = poly(1, &[(&[0], 1.0)]);
        assert!(!is_regular(&dictator, 0.99).unwrap());
        assert!(is_regular(&Polynomial::<f64>::majority(100), 0.1).unwrap());
        // 99 > 0.01 * 99^2 = 98.01
        assert!(!is_regular(&Polynomial::<f64>::majority(99), 0.1).unwrap());
        assert!(is_regular(&dictator, 0.0).is_err());
    }

    #[test]
    fn critical_index_examples() {
        let p = poly(3, &[(&[0], 4.0), (&[1], 1.0), (&[2], 1.0)]);
        // At ε = 1 the top weight 16 is already below σ_1² = 18.
        assert_eq!(critical_index(&p, 1.0).unwrap(), 0);
        // 16 > 0.64 * 18, then 1 <= 0.64 * 2.
        assert_eq!(critical_index(&p, 0.8).unwrap(), 1);
        assert_eq!(critical_index(&Polynomial::<f64>::majority(16), 0.25).unwrap(), 0);
        assert_eq!(critical_index(&poly(1, &[(&[0], 1.0)]), 0.5).unwrap(), 1);
    }

    #[test]
    fn sigma_decay_examples() {
        let p = poly(4, &[(&[0], 8.0), (&[1], 4.0), (&[2], 2.0), (&[3], 1.0)]);
        let w = weight_profile(&p).unwrap();
        let k = w.critical_index(0.5).unwrap();
        assert_eq!(k, 4);
        for i in 1..k {
            for j in i + 1..k {
                let lhs = w.sigma_sq[j - 1];
                let rhs = 0.75f64.powi((j - i) as i32) * w.sigma_sq[i - 1];
                assert!(lhs <= rhs, "i={i} j={j}");
            }
        }
        assert!(w.sigma_decay_check(0.5).unwrap());
        assert!(sigma_decay_check(&poly(1, &[(&[0], 1.0)]), 0.5).unwrap());
    }

    #[test]
    fn restricted_profile_matches_direct() {
        let p = poly(4, &[(&[0, 1], 1.5), (&[1, 2], -2.0), (&[0, 2, 3], 0.5), (&[3], 1.0)]);
        let r = Restriction::from_pairs([(0, -1)]).unwrap();
        let direct = WeightProfile::new(&p.restrict(&r).unwrap()).unwrap();
        assert_eq!(WeightProfile::of_restriction(&p, &r).unwrap(), direct);
    }

    #[test]
    fn tail_norm_on_geometric_weights() {
        let coeffs: Vec<f64> = (0..12).map(|i| 0.5f64.powi(i)).collect();
        let p = Polynomial::linear(&coeffs);
        let c = tail_norm_check(&p, 0.5, 3).unwrap().unwrap();
        assert!(c.passed(), "{c:?}");
        assert!(tail_norm_check(&Polynomial::<f64>::majority(8), 0.5, 3).unwrap().is_none());
    }
}
