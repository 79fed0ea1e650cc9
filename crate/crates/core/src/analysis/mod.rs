//! Property checkers and expected-welfare computation.

mod pareto;
mod truthfulness;
mod welfare;

pub use pareto::{check_pareto, check_universal_po, ParetoChecker, PoWitness, DEFAULT_PARETO_CAP};
pub use truthfulness::{check_universal_ft, FtChecker, FtScope, FtViolation};
pub use welfare::{exact_expected_sw, monte_carlo_sw, WelfareEstimator, WelfareReport, CI_Z_99};
