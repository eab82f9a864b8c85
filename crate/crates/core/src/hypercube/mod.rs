//! Influences, average sensitivity and noise sensitivity on the uniform
//! hypercube, exactly (truth table and Walsh spectrum) and by Monte Carlo.

mod exact;
mod mc;
mod table;

pub use exact::{
    average_sensitivity_exact, influence_exact, influences_exact, ns_exact, ns_exact_direct,
    ns_exact_spectral, sensitivity_fourier, NsMethod,
};
pub use mc::{as_mc, influence_mc, ns_mc, McConfig};
pub use table::{cube_values, point, walsh_hadamard, Spectrum, TruthTable};

use crate::error::{invalid, Result};

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("noise rate {delta} not in (0,1)")))
    }
}
