//! Contingency tables, the G-test of independence, adjusted standardized
//! residuals and the per-position test cache.

mod cache;
mod contingency;
mod gamma;

pub use self::cache::{run_test, TestCache, TestKey, TestOutcome};
pub use self::contingency::{build_contingency, ContingencyTable, Residual};
pub use self::gamma::chi_square_sf;

/// Default significance level for the G-test.
pub const DEFAULT_P_THRESHOLD: f64 = 0.05;
/// Default one-sided threshold on the detection-cell residual.
pub const DEFAULT_ASR_THRESHOLD: f64 = 1.96;
