//! Verification harness: each bound is packaged as a suite of checks over
//! exhaustive small instances and seeded random ensembles, reported as
//! `lhs <= rhs` rows with the achieved constant.

mod checks;
mod drift;
mod report;
mod suites;

pub use checks::{
    block_tightness_instance, check_actons, check_combas, check_hypercontractivity, check_mainlmc,
    check_nstoas, check_poly_lower_bounds, mainlmc_sides,
};
pub use drift::{drift_check, log_log_slope, ConstantPoint, DriftResult, DRIFT_FACTOR};
pub use report::{overall, to_csv, CheckReport, Status, CSV_HEADER};
pub use suites::{dictator_gns, ellipsoid, geometric_polynomial, head_heavy_polynomial, run_suite, SuiteOptions, SUITES};
