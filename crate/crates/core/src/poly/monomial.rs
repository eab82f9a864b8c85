use std::fmt;

use crate::error::{invalid, Result};

/// Product `Π x_i^{m_i}` stored as `(variable, multiplicity)` pairs with
/// strictly increasing variables and multiplicities `>= 1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    entries: Vec<(usize, u32)>,
}

impl Monomial {
    /// The empty monomial (constant 1).
    pub fn one() -> Self {
        Self::default()
    }

    pub fn new(entries: Vec<(usize, u32)>) -> Result<Self> {
        for w in entries.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(invalid("monomial variables must be strictly increasing"));
            }
        }
        if entries.iter().any(|&(_, m)| m == 0) {
            return Err(invalid("monomial multiplicity must be >= 1"));
        }
        Ok(Self { entries })
    }

    /// Builds a monomial from a non-decreasing index list; repeats encode
    /// multiplicity (`[0, 0, 2]` is `x0^2 x2`).
    pub fn from_sorted_indices(indices: &[usize]) -> Result<Self> {
        let mut entries: Vec<(usize, u32)> = Vec::new();
        for &i in indices {
            match entries.last_mut() {
                Some((v, m)) if *v == i => *m += 1,
                Some((v, _)) if *v > i => {
                    return Err(invalid("monomial indices must be non-decreasing"))
                }
                _ => entries.push((i, 1)),
            }
        }
        Ok(Self { entries })
    }

    /// Multilinear monomial over an arbitrary set of distinct variables.
    pub fn from_set(vars: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = vars.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self { entries: v.into_iter().map(|i| (i, 1)).collect() }
    }

    /// Multilinear monomial from a subset bitmask.
    pub fn from_mask(mask: u64) -> Self {
        Self::from_set((0..64).filter(|b| (mask >> b) & 1 == 1))
    }

    pub fn entries(&self) -> &[(usize, u32)] {
        &self.entries
    }

    pub fn degree(&self) -> usize {
        self.entries.iter().map(|&(_, m)| m as usize).sum()
    }

    pub fn is_constant(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_multilinear(&self) -> bool {
        self.entries.iter().all(|&(_, m)| m == 1)
    }

    pub fn variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(v, _)| v)
    }

    pub fn contains(&self, var: usize) -> bool {
        self.entries.binary_search_by_key(&var, |&(v, _)| v).is_ok()
    }

    pub fn multiplicity(&self, var: usize) -> u32 {
        self.entries
            .binary_search_by_key(&var, |&(v, _)| v)
            .map(|k| self.entries[k].1)
            .unwrap_or(0)
    }

    pub fn max_variable(&self) -> Option<usize> {
        self.entries.last().map(|&(v, _)| v)
    }

    /// Subset bitmask of a multilinear monomial over variables `< 64`.
    pub fn mask(&self) -> Option<u64> {
        if !self.is_multilinear() {
            return None;
        }
        self.entries.iter().try_fold(0u64, |acc, &(v, _)| (v < 64).then(|| acc | (1 << v)))
    }

    /// Index list with repeats, the text-format encoding.
    pub fn indices(&self) -> Vec<usize> {
        self.entries
            .iter()
            .flat_map(|&(v, m)| std::iter::repeat_n(v, m as usize))
            .collect()
    }

    /// Product with another monomial (multiplicities add).
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(va, ma)), Some(&&(vb, mb))) => {
                    if va == vb {
                        out.push((va, ma + mb));
                        a.next();
                        b.next();
                    } else if va < vb {
                        out.push((va, ma));
                        a.next();
                    } else {
                        out.push((vb, mb));
                        b.next();
                    }
                }
                (Some(&&e), None) => {
                    out.push(e);
                    a.next();
                }
                (None, Some(&&e)) => {
                    out.push(e);
                    b.next();
                }
                (None, None) => break,
            }
        }
        Monomial { entries: out }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "1");
        }
        for (k, &(v, m)) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if m == 1 {
                write!(f, "x{v}")?;
            } else {
                write!(f, "x{v}^{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_rules() {
        assert!(Monomial::new(vec![(2, 1), (1, 1)]).is_err());
        assert!(Monomial::new(vec![(1, 0)]).is_err());
        assert!(Monomial::from_sorted_indices(&[2, 1]).is_err());
        let m = Monomial::from_sorted_indices(&[0, 0, 3]).unwrap();
        assert_eq!(m.entries(), &[(0, 2), (3, 1)]);
        assert_eq!(m.degree(), 3);
        assert!(!m.is_multilinear());
        assert_eq!(m.indices(), vec![0, 0, 3]);
        assert_eq!(m.mask(), None);
    }

    #[test]
    fn mask_round_trip() {
        let m = Monomial::from_set([5, 1, 3]);
        assert_eq!(m.mask(), Some(0b101010));
        assert_eq!(Monomial::from_mask(0b101010), m);
    }

    #[test]
    fn product_adds_multiplicities() {
        let a = Monomial::from_sorted_indices(&[0, 2]).unwrap();
        let b = Monomial::from_sorted_indices(&[1, 2]).unwrap();
        assert_eq!(a.mul(&b).entries(), &[(0, 1), (1, 1), (2, 2)]);
    }
}
