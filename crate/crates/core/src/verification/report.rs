//! Verification outcomes.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One sub-statistic of a report. Passes when `value <= threshold`
/// (a zero threshold demands an exact zero).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn ratio(&self) -> f64 {
        if self.threshold > 0.0 {
            self.value / self.threshold
        } else if self.value > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

/// Outcome of one verification.
///
/// `statistic`/`threshold` repeat the worst check (largest value/threshold
/// ratio); `pass` holds when every check passes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub anchor: String,
    pub statistic_name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub n_samples: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub details: BTreeMap<String, f64>,
}

impl TestReport {
    /// Failing checks.
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// One-line summary.
    pub fn summary(&self) -> String {
        format!(
            "{} [{}] {}: {} = {:.4e} (threshold {:.4e}), n = {}, seed = {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.anchor,
            self.statistic_name,
            self.statistic,
            self.threshold,
            self.n_samples,
            self.seed
        )
    }
}

/// Collects checks and applies a Bonferroni correction across p-values.
#[derive(Clone, Debug)]
pub struct ReportBuilder {
    name: String,
    anchor: String,
    seed: u64,
    alpha: f64,
    bounds: Vec<Check>,
    p_values: Vec<(String, f64)>,
    details: BTreeMap<String, f64>,
}

impl ReportBuilder {
    /// Start a report at significance level `alpha`.
    pub fn new(name: impl Into<String>, anchor: impl Into<String>, seed: u64, alpha: f64) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            seed,
            alpha,
            bounds: Vec::new(),
            p_values: Vec::new(),
            details: BTreeMap::new(),
        }
    }

    /// Deterministic check `value <= threshold`.
    pub fn bound(&mut self, name: impl Into<String>, value: f64, threshold: f64) -> &mut Self {
        let pass = if threshold > 0.0 { value <= threshold } else { value == 0.0 };
        self.bounds.push(Check { name: name.into(), value, threshold, pass });
        self
    }

    /// P-value check, framed as `-ln p <= -ln(α/k)` over the `k` p-values.
    pub fn p_value(&mut self, name: impl Into<String>, p: f64) -> &mut Self {
        self.p_values.push((name.into(), p));
        self
    }

    /// Auxiliary value.
    pub fn detail(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.details.insert(key.into(), value);
        self
    }

    /// Number of p-value checks collected so far.
    pub fn p_value_count(&self) -> usize {
        self.p_values.len()
    }

    /// Assemble the report.
    pub fn finish(self, n_samples: usize) -> TestReport {
        let k = self.p_values.len().max(1) as f64;
        let threshold = -(self.alpha / k).ln();
        let mut checks = self.bounds;
        for (name, p) in self.p_values {
            let value = -p.max(f64::MIN_POSITIVE).ln();
            checks.push(Check { name: format!("{name} (-ln p)"), value, threshold, pass: value <= threshold });
        }
        let worst = checks
            .iter()
            .max_by(|a, b| a.ratio().total_cmp(&b.ratio()))
            .cloned()
            .unwrap_or(Check { name: "none".into(), value: 0.0, threshold: 0.0, pass: true });
        TestReport {
            name: self.name,
            anchor: self.anchor,
            statistic_name: worst.name,
            statistic: worst.value,
            threshold: worst.threshold,
            pass: checks.iter().all(|c| c.pass),
            n_samples,
            seed: self.seed,
            checks,
            details: self.details,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bonferroni_and_headline() {
        let mut b = ReportBuilder::new("t", "a", 7, 0.01);
        b.p_value("x", 0.5).p_value("y", 0.006).bound("err", 0.0, 0.0);
        let r = b.finish(10);
        assert!(r.pass);
        assert_eq!(r.statistic_name, "y (-ln p)");
        assert!((r.threshold - (200.0f64).ln()).abs() < 1e-12);
        let mut b = ReportBuilder::new("t", "a", 7, 0.01);
        b.bound("err", 1e-16, 0.0);
        assert!(!b.finish(1).pass);
    }
}
