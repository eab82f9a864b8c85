use super::table::{Spectrum, TruthTable};
use crate::error::{invalid, Error, Result};
use crate::limits::check_brute;

/// Which exact route [`ns_exact`] takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NsMethod {
    /// Direct sum over all `(x, flip pattern)` pairs; `n <= BRUTE_LIMIT`.
    Direct,
    /// `1/2 - 1/2 Σ f̂(S)² (1-2δ)^{|S|}`.
    Spectral,
}

/// `Pr_x[f(x) != f(x^(i))]` by full enumeration.
pub fn influence_exact(t: &TruthTable, i: usize) -> Result<f64> {
    if i >= t.n() {
        return Err(Error::IndexOutOfRange { index: i, n: t.n() });
    }
    let bit = 1usize << i;
    let s = t.signs();
    let flips = (0..s.len()).filter(|&x| s[x] != s[x ^ bit]).count();
    Ok(flips as f64 / s.len() as f64)
}

pub fn influences_exact(t: &TruthTable) -> Vec<f64> {
    (0..t.n()).map(|i| influence_exact(t, i).expect("i < n")).collect()
}

/// Sum of all influences.
pub fn average_sensitivity_exact(t: &TruthTable) -> f64 {
    influences_exact(t).iter().sum()
}

/// `(AS, influences)` from the spectrum: `I_i = Σ_{S∋i} f̂(S)²`.
pub fn sensitivity_fourier(s: &Spectrum) -> Result<(f64, Vec<f64>)> {
    let parseval = s.parseval_sum();
    if (parseval - 1.0).abs() > 1e-6 {
        return Err(Error::NotBoolean(parseval));
    }
    let n = s.n();
    let mut infl = vec![0.0; n];
    let mut total = 0.0;
    for (mask, &c) in s.coeffs().iter().enumerate() {
        let w = c * c;
        if w == 0.0 {
            continue;
        }
        total += mask.count_ones() as f64 * w;
        for (i, slot) in infl.iter_mut().enumerate() {
            if (mask >> i) & 1 == 1 {
                *slot += w;
            }
        }
    }
    Ok((total, infl))
}

fn check_exact_delta(delta: f64) -> Result<()> {
    // delta = 1 (every bit flips) is well defined and needed for n = 1 at delta = 1/n.
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("noise rate {delta} not in (0,1]")))
    }
}

/// `Pr[f(X) != f(Z)]` summed over every flip pattern.
pub fn ns_exact_direct(t: &TruthTable, delta: f64) -> Result<f64> {
    check_exact_delta(delta)?;
    let n = t.n();
    check_brute(n)?;
    let s = t.signs();
    let size = s.len();
    // disagreements[k] = Σ_{|p| = k} #{x : f(x) != f(x ⊕ p)}
    let mut disagreements = vec![0u64; n + 1];
    for p in 1..size {
        let d = (0..size).filter(|&x| s[x] != s[x ^ p]).count() as u64;
        disagreements[p.count_ones() as usize] += d;
    }
    let total: f64 = disagreements
        .iter()
        .enumerate()
        .map(|(k, &d)| d as f64 * delta.powi(k as i32) * (1.0 - delta).powi((n - k) as i32))
        .sum();
    Ok(total / size as f64)
}

pub fn ns_exact_spectral(s: &Spectrum, delta: f64) -> Result<f64> {
    check_exact_delta(delta)?;
    let rho = 1.0 - 2.0 * delta;
    let n = s.n();
    let mut by_level = vec![0.0; n + 1];
    for (mask, &c) in s.coeffs().iter().enumerate() {
        by_level[mask.count_ones() as usize] += c * c;
    }
    let stable: f64 = by_level.iter().enumerate().map(|(k, w)| w * rho.powi(k as i32)).sum();
    Ok(0.5 - 0.5 * stable)
}

/// Exact noise sensitivity by the chosen route.
pub fn ns_exact(t: &TruthTable, delta: f64, method: NsMethod) -> Result<f64> {
    match method {
        NsMethod::Direct => ns_exact_direct(t, delta),
        NsMethod::Spectral => ns_exact_spectral(&t.fourier_transform(), delta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{Monomial, Polynomial, Ptf};

    fn table(f: &Ptf) -> TruthTable {
        TruthTable::from_ptf(f).unwrap()
    }

    fn parity2() -> Ptf {
        let mut p = Polynomial::zero(2);
        p.add_term(Monomial::from_set([0, 1]), 1.0).unwrap();
        Ptf::new(p, 0.0)
    }

    #[test]
    fn influence_examples() {
        let d = table(&Ptf::dictator(2, 0));
        assert_eq!(influence_exact(&d, 0).unwrap(), 1.0);
        assert_eq!(influence_exact(&d, 1).unwrap(), 0.0);
        assert!(influence_exact(&d, 2).is_err());
        let p = table(&parity2());
        assert_eq!(influences_exact(&p), vec![1.0, 1.0]);
        let m = table(&Ptf::majority(3));
        assert_eq!(influences_exact(&m), vec![0.5; 3]);
    }

    #[test]
    fn average_sensitivity_examples() {
        assert_eq!(average_sensitivity_exact(&table(&Ptf::majority(3))), 1.5);
        assert_eq!(average_sensitivity_exact(&table(&parity2())), 2.0);
        let c = table(&Ptf::new(Polynomial::constant(4, 1.0), 0.0));
        assert_eq!(average_sensitivity_exact(&c), 0.0);
    }

    #[test]
    fn fourier_sensitivity_examples() {
        let (as_, infl) = sensitivity_fourier(&table(&Ptf::majority(3)).fourier_transform()).unwrap();
        assert_eq!(as_, 1.5);
        assert_eq!(infl, vec![0.5; 3]);
        let (as_, _) = sensitivity_fourier(&table(&Ptf::dictator(4, 2)).fourier_transform()).unwrap();
        assert_eq!(as_, 1.0);
        let bad = Spectrum::new(1, vec![0.5, 0.5]).unwrap();
        assert!(matches!(sensitivity_fourier(&bad), Err(Error::NotBoolean(_))));
    }

    #[test]
    fn noise_sensitivity_examples() {
        let d = table(&Ptf::dictator(1, 0));
        for delta in [0.05, 0.3, 0.5] {
            assert!((ns_exact_direct(&d, delta).unwrap() - delta).abs() < 1e-15);
        }
        // Parity of two bits changes iff exactly one bit flips.
        let p = table(&parity2());
        assert!((ns_exact_direct(&p, 0.1).unwrap() - 0.18).abs() < 1e-15);
        // Maj3: one flip changes it w.p. 1/2, two flips w.p. 1/2, three always.
        // 0.243/2 + 0.027/2 + 0.001 = 0.136.
        let m = table(&Ptf::majority(3));
        let direct = ns_exact_direct(&m, 0.1).unwrap();
        assert!((direct - 0.136).abs() < 1e-12, "{direct}");
        assert!((ns_exact_spectral(&m.fourier_transform(), 0.1).unwrap() - 0.136).abs() < 1e-12);
        assert!(ns_exact_direct(&m, 0.0).is_err());
        assert!(ns_exact_direct(&m, 1.5).is_err());
    }

    #[test]
    fn majority3_noise_sensitivity_by_pair_enumeration() {
        // Independent oracle: enumerate (x, z) pairs with their probabilities.
        let m = table(&Ptf::majority(3));
        let delta: f64 = 0.1;
        let mut total = 0.0;
        for x in 0..8usize {
            for z in 0..8usize {
                let k = (x ^ z).count_ones() as i32;
                let w = delta.powi(k) * (1.0 - delta).powi(3 - k) / 8.0;
                if m.get(x) != m.get(z) {
                    total += w;
                }
            }
        }
        assert!((total - 0.136).abs() < 1e-12);
    }
}
