use crate::error::{invalid, Error, Result};
use crate::estimate::{Estimate, Measured};
use crate::hypercube::{McConfig, TruthTable};
use crate::limits::exact_limit;
use crate::poly::{CompiledPtf, Monomial, Polynomial, Ptf, Restriction};
use crate::rng::{count_hits_with, fill_signs, Streams};
use crate::scalar::Scalar;

/// How probabilities over the unrestricted cube are obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Evaluation {
    /// Full truth table; errors above the exact limit.
    Exact,
    /// Monte Carlo with the given configuration.
    Sampled(McConfig),
    /// Exact up to `max_exact` free variables, sampled beyond.
    Auto { max_exact: usize, mc: McConfig },
}

impl Evaluation {
    pub fn auto(mc: McConfig) -> Self {
        Self::Auto { max_exact: 20, mc }
    }

    /// Same mode with the sampling seed replaced.
    pub fn reseeded(self, seed: u64) -> Self {
        match self {
            Self::Exact => Self::Exact,
            Self::Sampled(mc) => Self::Sampled(McConfig { seed, ..mc }),
            Self::Auto { max_exact, mc } => Self::Auto { max_exact, mc: McConfig { seed, ..mc } },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Determining,
    NotDetermining,
    /// The confidence interval contains the threshold.
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeterminingResult {
    pub outcome: Outcome,
    /// The majority value of the restricted function.
    pub b: i8,
    /// `Pr[f_r != b]`.
    pub bias: Measured,
}

impl DeterminingResult {
    pub fn is_determining(&self) -> bool {
        self.outcome == Outcome::Determining
    }
}

/// The restricted polynomial re-indexed onto its free variables, together
/// with the original index of each new variable.
pub fn compact<T: Scalar>(p: &Polynomial<T>, r: &Restriction) -> Result<(Polynomial<T>, Vec<usize>)> {
    let restricted = p.restrict(r)?;
    let free: Vec<usize> = (0..p.n()).filter(|&v| r.get(v).is_none()).collect();
    let mut slot = vec![usize::MAX; p.n()];
    for (new, &old) in free.iter().enumerate() {
        slot[old] = new;
    }
    let terms = restricted.terms().iter().map(|(m, &c)| {
        let entries = m.entries().iter().map(|&(v, k)| (slot[v], k)).collect();
        (Monomial::new(entries).expect("order preserved"), c)
    });
    Ok((Polynomial::from_terms(free.len(), terms)?, free))
}

/// `Pr_x[f(x) = -1]` over the free variables of `r`, exactly or sampled.
pub fn minus_probability<T: Scalar>(f: &Ptf<T>, r: &Restriction, eval: &Evaluation) -> Result<Measured> {
    let (p, _) = compact(&f.poly, r)?;
    let g = Ptf::new(p, f.theta);
    let m = g.n();
    let exact = match eval {
        Evaluation::Exact => {
            if !g.poly.is_multilinear() {
                return Err(Error::NotMultilinear);
            }
            if m > exact_limit() {
                return Err(Error::SizeLimit { n: m, limit: exact_limit() });
            }
            true
        }
        Evaluation::Sampled(_) => false,
        Evaluation::Auto { max_exact, .. } => {
            g.poly.is_multilinear() && m <= (*max_exact).min(exact_limit())
        }
    };
    if exact || g.poly.is_constant() {
        if g.poly.is_constant() {
            let s = crate::poly::sign(g.poly.constant_term() - g.theta);
            return Ok(Measured::Exact(if s < 0 { 1.0 } else { 0.0 }));
        }
        let table = TruthTable::from_ptf(&g)?;
        return Ok(Measured::Exact(1.0 - table.mean_positive()));
    }
    let mc = match eval {
        Evaluation::Sampled(mc) | Evaluation::Auto { mc, .. } => *mc,
        Evaluation::Exact => unreachable!(),
    };
    mc.check()?;
    let c = CompiledPtf::new(&g);
    let streams = Streams::new(mc.seed);
    let hits = count_hits_with(
        &streams,
        mc.samples,
        || vec![T::zero(); m],
        |x, rng| {
            fill_signs(rng, x);
            c.evaluate(x) < 0
        },
    );
    Ok(Measured::Sampled(Estimate::from_hits(hits, mc.samples, mc.confidence, mc.seed)?))
}

/// Whether `r` is `ε`-determining for `f`: `Pr[f_r != b] <= ε` for the
/// majority sign `b`. Sampled runs answer `Inconclusive` when the interval
/// contains `ε`.
pub fn determining_test<T: Scalar>(
    f: &Ptf<T>,
    r: &Restriction,
    epsilon: f64,
    eval: &Evaluation,
) -> Result<DeterminingResult> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(invalid(format!("epsilon {epsilon} must be non-negative")));
    }
    if let Some((v, _)) = r.iter().last() {
        if v >= f.n() {
            return Err(Error::IndexOutOfRange { index: v, n: f.n() });
        }
    }
    let minus = minus_probability(f, r, eval)?;
    let b: i8 = if minus.value() <= 0.5 { 1 } else { -1 };
    let bias = match minus {
        Measured::Exact(p) => Measured::Exact(if b > 0 { p } else { 1.0 - p }),
        Measured::Sampled(e) => {
            let value = if b > 0 { e.value } else { 1.0 - e.value };
            Measured::Sampled(Estimate { value, ..e })
        }
    };
    let outcome = match bias {
        Measured::Exact(p) if p <= epsilon => Outcome::Determining,
        Measured::Exact(_) => Outcome::NotDetermining,
        Measured::Sampled(e) if e.upper() <= epsilon => Outcome::Determining,
        Measured::Sampled(e) if e.lower() > epsilon => Outcome::NotDetermining,
        Measured::Sampled(_) => Outcome::Inconclusive,
    };
    Ok(DeterminingResult { outcome, b, bias })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ptf(n: usize, t: &[(&[usize], f64)]) -> Ptf {
        let p = Polynomial::from_terms(
            n,
            t.iter().map(|(ix, c)| (Monomial::from_set(ix.iter().copied()), *c)),
        )
        .unwrap();
        Ptf::new(p, 0.0)
    }

    #[test]
    fn constant_restriction_is_determining() {
        let f = ptf(2, &[(&[0], 1.0), (&[1], 0.1)]);
        let r = Restriction::from_pairs([(0, 1)]).unwrap();
        let res = determining_test(&f, &r, 0.0, &Evaluation::Exact).unwrap();
        assert_eq!(res.outcome, Outcome::Determining);
        assert_eq!(res.b, 1);
        assert_eq!(res.bias, Measured::Exact(0.0));
    }

    #[test]
    fn parity_restriction_is_balanced() {
        let f = ptf(2, &[(&[0, 1], 1.0)]);
        let r = Restriction::from_pairs([(0, 1)]).unwrap();
        let res = determining_test(&f, &r, 0.49, &Evaluation::Exact).unwrap();
        assert_eq!(res.outcome, Outcome::NotDetermining);
        assert_eq!(res.bias.value(), 0.5);
    }

    #[test]
    fn majority_with_two_agreeing_votes() {
        let f = Ptf::<f64>::majority(3);
        let r = Restriction::from_pairs([(0, 1), (1, 1)]).unwrap();
        for eps in [0.0, 0.1, 0.5] {
            let res = determining_test(&f, &r, eps, &Evaluation::Exact).unwrap();
            assert!(res.is_determining());
            assert_eq!(res.b, 1);
        }
        let r = Restriction::from_pairs([(0, -1), (1, -1)]).unwrap();
        let res = determining_test(&f, &r, 0.0, &Evaluation::Exact).unwrap();
        assert_eq!(res.b, -1);
    }

    #[test]
    fn sampled_mode_is_three_valued() {
        let f = ptf(2, &[(&[0, 1], 1.0)]);
        let r = Restriction::from_pairs([(0, 1)]).unwrap();
        let mc = McConfig::new(2000, 0.99, 5);
        let far = determining_test(&f, &r, 0.1, &Evaluation::Sampled(mc)).unwrap();
        assert_eq!(far.outcome, Outcome::NotDetermining);
        let near = determining_test(&f, &r, 0.5, &Evaluation::Sampled(mc)).unwrap();
        assert_eq!(near.outcome, Outcome::Inconclusive);
        let f = Ptf::<f64>::majority(3);
        let r = Restriction::from_pairs([(0, 1), (1, 1)]).unwrap();
        let sure = determining_test(&f, &r, 0.1, &Evaluation::Sampled(mc)).unwrap();
        assert_eq!(sure.bias.value(), 0.0);
        assert!(sure.is_determining());
    }

    #[test]
    fn compact_reindexes() {
        let f = ptf(4, &[(&[0, 2], 1.0), (&[1, 3], 2.0), (&[3], 1.0)]);
        let r = Restriction::from_pairs([(1, -1)]).unwrap();
        let (p, free) = compact(&f.poly, &r).unwrap();
        assert_eq!(free, vec![0, 2, 3]);
        assert_eq!(p.n(), 3);
        assert_eq!(p.coefficient(&Monomial::from_set([0, 1])), 1.0);
        assert_eq!(p.coefficient(&Monomial::from_set([2])), -1.0);
    }

    #[test]
    fn rejects_bad_index() {
        let f = Ptf::<f64>::majority(3);
        let r = Restriction::from_pairs([(5, 1)]).unwrap();
        assert!(determining_test(&f, &r, 0.1, &Evaluation::Exact).is_err());
    }
}
