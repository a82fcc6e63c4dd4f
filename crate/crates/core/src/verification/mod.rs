//! Statistical and exact checks of invariance, detailed balance, Burke's
//! property, ergodicity reconstruction and scaling limits.
//!
//! Every check returns a [`TestReport`]. Sub-statistics are framed so that
//! smaller is better: p-values enter as `-ln p` against `-ln(α/k)` with a
//! Bonferroni correction over the `k` p-values of the report.

pub mod balance;
pub mod dynamics;
pub mod limits;
pub mod quadrant;
pub mod report;
pub mod stats;

use serde::{Deserialize, Serialize};

pub use balance::{bbs_carrier_law, carrier_fixed_point, check_detailed_balance, check_detailed_balance_star, EXACT_TV};
pub use dynamics::{check_burke, check_ergodicity_reconstruction, check_invariance, CARRIER_STRIDE, MAX_LAG};
pub use limits::{check_correspondence, check_ultradiscretization, ks_inversions, CorrespondenceSide, UltraTarget};
pub use quadrant::{check_quadrant_stationarity, QUADRANT_RESIDUAL};
pub use report::{Check, ReportBuilder, TestReport};
pub use stats::{
    autocorrelation, chi2_gof, chi2_independence, ks_discrete, ks_one_sample, ks_two_sample, marginal_test,
    tv_distance_exact, Chi2Stat, MarginalKind, MarginalStat, TestStat,
};

use crate::error::Result;
use crate::rng::RngStream;

/// Significance level and binning shared by the statistical checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TestSettings {
    /// Family-wise significance level of one report.
    pub alpha: f64,
    /// Quantile bins per coordinate in independence tests.
    pub bins: usize,
}

impl Default for TestSettings {
    fn default() -> Self {
        Self { alpha: 0.01, bins: 8 }
    }
}

/// Number of passing reports among `reps` runs of `check` on child streams
/// of `seed`.
pub fn calibrate(reps: usize, seed: u64, check: impl Fn(&RngStream) -> Result<TestReport>) -> Result<usize> {
    let root = RngStream::new(seed);
    let mut passes = 0;
    for k in 0..reps {
        if check(&root.child(k as u64))?.pass {
            passes += 1;
        }
    }
    Ok(passes)
}
