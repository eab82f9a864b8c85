use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Monomial, Polynomial, Ptf};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Upper bound on the number of monomials a generator may populate.
const MAX_GENERATED_TERMS: u128 = 20_000_000;

/// How coefficients of generated polynomials are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientModel {
    /// Independent `N(0, 1)` coefficients.
    UnitGaussian,
    /// Independent uniform `±1` coefficients.
    SignedUnit,
    /// Linear coefficients 1; all other coefficients `N(0, 1) / n`.
    MajorityLike,
    /// Variables split into blocks of size `ceil(sqrt(n))`; a variable in
    /// block `k` scales every monomial containing it by `2^-k`, so weights
    /// decay geometrically from block to block.
    BlockStructured,
}

impl CoefficientModel {
    pub fn name(&self) -> &'static str {
        match self {
            CoefficientModel::UnitGaussian => "unit-gaussian",
            CoefficientModel::SignedUnit => "signed-unit",
            CoefficientModel::MajorityLike => "majority-like",
            CoefficientModel::BlockStructured => "block-structured",
        }
    }

    fn tag(&self) -> u64 {
        *self as u64 + 1
    }
}

impl FromStr for CoefficientModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit-gaussian" => Ok(Self::UnitGaussian),
            "signed-unit" => Ok(Self::SignedUnit),
            "majority-like" => Ok(Self::MajorityLike),
            "block-structured" => Ok(Self::BlockStructured),
            other => Err(invalid(format!("unknown coefficient model '{other}'"))),
        }
    }
}

fn monomial_count(n: usize, d: usize) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128;
    for k in 0..=d {
        if k > 0 {
            binom = binom * (n - k + 1) as u128 / k as u128;
        }
        total += binom;
    }
    total
}

/// Calls `visit` on every subset of `0..n` of size `k`, in lexicographic order.
pub(crate) fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Multilinear polynomial with every monomial of degree `<= d` (constant
/// included) populated according to `model`. Deterministic in
/// `(model, n, d, seed)`.
pub fn random_polynomial<T: Scalar>(
    n: usize,
    d: usize,
    model: CoefficientModel,
    seed: u64,
) -> Result<Polynomial<T>> {
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    if d > n {
        return Err(invalid(format!("degree {d} exceeds n = {n} for a multilinear polynomial")));
    }
    if monomial_count(n, d) > MAX_GENERATED_TERMS {
        return Err(Error::Budget(format!("C(n, <= {d}) monomials for n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(model.tag());
    let block = (n as f64).sqrt().ceil() as usize;
    let mut p = Polynomial::zero(n);
    for k in 0..=d {
        for_each_subset(n, k, |set| {
            let c: f64 = match model {
                CoefficientModel::UnitGaussian => rng.sample(StandardNormal),
                CoefficientModel::SignedUnit => {
                    if rng.random::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
                CoefficientModel::MajorityLike => {
                    if k == 1 {
                        1.0
                    } else {
                        rng.sample::<f64, _>(StandardNormal) / n as f64
                    }
                }
                CoefficientModel::BlockStructured => {
                    let g: f64 = rng.sample(StandardNormal);
                    let shift: i32 = set.iter().map(|&i| (i / block) as i32).sum();
                    g * 2f64.powi(-shift)
                }
            };
            p.add_term(Monomial::from_set(set.iter().copied()), T::from_f64_lossy(c))
                .expect("indices < n");
        });
    }
    Ok(p)
}

/// Random PTF with `θ = 0`; the generated constant term plays the role of
/// the threshold.
pub fn random_ptf<T: Scalar>(
    n: usize,
    d: usize,
    model: CoefficientModel,
    seed: u64,
) -> Result<Ptf<T>> {
    Ok(Ptf::new(random_polynomial(n, d, model, seed)?, T::zero()))
}
