//! Size caps for exhaustive computations.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};

/// Default cap on `n` for truth tables and spectra (2^26 entries).
pub const DEFAULT_EXACT_LIMIT: usize = 26;
/// Cap on `n` for the 4^n flip-pattern noise-sensitivity sum.
pub const BRUTE_LIMIT: usize = 12;

static EXACT_LIMIT: AtomicUsize = AtomicUsize::new(DEFAULT_EXACT_LIMIT);

pub fn exact_limit() -> usize {
    EXACT_LIMIT.load(Ordering::Relaxed)
}

/// Overrides the truth-table cap for the whole process.
pub fn set_exact_limit(limit: usize) {
    EXACT_LIMIT.store(limit.min(40), Ordering::Relaxed);
}

pub(crate) fn check_exact(n: usize) -> Result<()> {
    let limit = exact_limit();
    if n > limit {
        Err(Error::SizeLimit { n, limit })
    } else {
        Ok(())
    }
}

pub(crate) fn check_brute(n: usize) -> Result<()> {
    if n > BRUTE_LIMIT {
        Err(Error::SizeLimit { n, limit: BRUTE_LIMIT })
    } else {
        Ok(())
    }
}
