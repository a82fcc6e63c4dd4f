//! Experiment configuration, orchestration and output files.
//!
//! A configuration is one JSON object naming an experiment, its model, the
//! laws it needs (by slot name), Monte Carlo sizes with a mandatory seed,
//! test settings and an optional output target. A suite is an object with
//! an `experiments` array of such configurations.
//!
//! Slots and sizes per experiment:
//!
//! | experiment | model | measures | sizes |
//! |---|---|---|---|
//! | `detailed_balance` | type I map | `mu`, `nu` | `samples` |
//! | `detailed_balance_star` | star map | `mu`, `nu`, `mu_tilde`, `nu_tilde` | `samples` |
//! | `invariance` | type I or II map | `mu`, optional `nu`, `mu_tilde` for type II | `window`, `margin`, `n_fields` |
//! | `burke` | type I or II map | `mu`, `nu`, `mu_tilde` for type II | `window`, `time_steps` |
//! | `ergodicity_reconstruction` | type I map | `mu`, `nu` | `window`, `time_steps`, `n_fields` |
//! | `ultradiscretization` | `target` | none | `samples`, `test.eps_list` |
//! | `correspondence` | `target` | none | `samples`, `test.eps_list` |
//! | `stochastic_quadrant` | quadrant kernel | `boundary_x`, `boundary_u`, `bulk` | `window`, `samples` |
//! | `simulate` | type I or II map | `initial` or `mu` (and `mu_tilde`) | `window`, `margin`, `time_steps` |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::carrier_solver::{evolve_multi, LatticeWindow, SpaceTimeField};
use crate::distributions::{Distribution, DistributionSpec};
use crate::error::{Error, Result};
use crate::lattice_maps::{LatticeKind, LocalMap};
use crate::rng::RngStream;
use crate::stochastic_lattice::write_atomic;
use crate::verification::{
    check_burke, check_correspondence, check_detailed_balance, check_detailed_balance_star,
    check_ergodicity_reconstruction, check_invariance, check_quadrant_stationarity, check_ultradiscretization,
    CorrespondenceSide, TestReport, TestSettings, UltraTarget,
};

/// Bundled suite covering the acceptance experiments.
pub const PAPER_SUITE: &str = include_str!("../suites/paper-suite.json");

/// Experiment kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    DetailedBalance,
    DetailedBalanceStar,
    Invariance,
    Burke,
    ErgodicityReconstruction,
    Ultradiscretization,
    Correspondence,
    StochasticQuadrant,
    Simulate,
}

impl ExperimentKind {
    /// Name used in JSON and reports.
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::DetailedBalance => "detailed_balance",
            ExperimentKind::DetailedBalanceStar => "detailed_balance_star",
            ExperimentKind::Invariance => "invariance",
            ExperimentKind::Burke => "burke",
            ExperimentKind::ErgodicityReconstruction => "ergodicity_reconstruction",
            ExperimentKind::Ultradiscretization => "ultradiscretization",
            ExperimentKind::Correspondence => "correspondence",
            ExperimentKind::StochasticQuadrant => "stochastic_quadrant",
            ExperimentKind::Simulate => "simulate",
        }
    }
}

/// Limit experiment target: an [`UltraTarget`] (tagged by `target`) or a
/// [`CorrespondenceSide`] (tagged by `side`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Target {
    Ultra(UltraTarget),
    Side(CorrespondenceSide),
}

/// Monte Carlo sizes and the master seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "defaults::samples")]
    pub samples: usize,
    #[serde(default = "defaults::window")]
    pub window: usize,
    #[serde(default = "defaults::margin")]
    pub margin: usize,
    #[serde(default = "defaults::time_steps")]
    pub time_steps: usize,
    #[serde(default = "defaults::n_fields")]
    pub n_fields: usize,
    pub seed: u64,
}

/// Significance level, binning and the ε schedule of limit experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestConfig {
    #[serde(default = "defaults::alpha")]
    pub alpha: f64,
    #[serde(default = "defaults::bins")]
    pub bins: usize,
    #[serde(default)]
    pub eps_list: Vec<f64>,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self { alpha: defaults::alpha(), bins: defaults::bins(), eps_list: Vec::new() }
    }
}

impl TestConfig {
    /// Settings passed to the checks.
    pub fn settings(&self) -> TestSettings {
        TestSettings { alpha: self.alpha, bins: self.bins }
    }
}

/// Report file format.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(Error::config("output.format", format!("expected json or csv, got `{s}`"))),
        }
    }
}

/// Output target of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

/// Explicit initial row of a simulation: site values (type I) or
/// interleaved `Q, E` values (type II) starting at index `offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialRow {
    #[serde(default = "defaults::offset")]
    pub offset: i64,
    pub values: Vec<f64>,
}

/// One experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Label used in outputs; defaults to the experiment kind.
    #[serde(default)]
    pub name: Option<String>,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub model: Option<LocalMap>,
    #[serde(default)]
    pub target: Option<Target>,
    #[serde(default)]
    pub measures: BTreeMap<String, DistributionSpec>,
    pub mc: McConfig,
    #[serde(default)]
    pub test: TestConfig,
    #[serde(default)]
    pub output: Option<OutputConfig>,
    #[serde(default)]
    pub initial: Option<InitialRow>,
}

/// Several experiments run together.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    pub experiments: Vec<ExperimentConfig>,
}

mod defaults {
    pub fn samples() -> usize {
        100_000
    }
    pub fn window() -> usize {
        4096
    }
    pub fn margin() -> usize {
        512
    }
    pub fn time_steps() -> usize {
        512
    }
    pub fn n_fields() -> usize {
        32
    }
    pub fn alpha() -> f64 {
        0.01
    }
    pub fn bins() -> usize {
        8
    }
    pub fn offset() -> i64 {
        1
    }
}

/// Deserialize with a diagnostic naming the offending field.
fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let msg = e.inner().to_string();
        let msg = msg.split(" at line ").next().unwrap_or(&msg).to_string();
        if let Some(field) = msg.strip_prefix("missing field `").and_then(|m| m.split('`').next()) {
            let full = if path == "." { field.to_string() } else { format!("{path}.{field}") };
            return Error::config(full, "required");
        }
        Error::config(if path == "." { "<root>".to_string() } else { path }, msg)
    })
}

/// Parse and validate one experiment.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let c: ExperimentConfig = from_json(text)?;
    c.validate()?;
    Ok(c)
}

/// Parse and validate a suite or a single experiment.
pub fn parse_suite(text: &str) -> Result<Suite> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::config("<root>", e.to_string()))?;
    let suite = if v.get("experiments").is_some() {
        from_json::<Suite>(text)?
    } else {
        Suite { experiments: vec![from_json::<ExperimentConfig>(text)?] }
    };
    if suite.experiments.is_empty() {
        return Err(Error::config("experiments", "at least one experiment is required"));
    }
    for (i, c) in suite.experiments.iter().enumerate() {
        c.validate().map_err(|e| match e {
            Error::Config { field, reason } if v.get("experiments").is_some() => {
                Error::config(format!("experiments[{i}].{field}"), reason)
            }
            e => e,
        })?;
    }
    Ok(suite)
}

impl ExperimentConfig {
    /// Label used in outputs.
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.experiment.name().to_string())
    }

    /// Model or target name used in outputs.
    pub fn model_label(&self) -> String {
        match (&self.model, &self.target) {
            (Some(m), _) => serde_json::to_string(m).unwrap_or_else(|_| m.name().to_string()),
            (None, Some(t)) => serde_json::to_string(t).unwrap_or_default(),
            (None, None) => String::new(),
        }
    }

    fn model(&self) -> Result<LocalMap> {
        let m = self.model.ok_or_else(|| Error::config("model", "required"))?;
        m.validate().map_err(|e| Error::config("model", e.to_string()))?;
        Ok(m)
    }

    fn measure(&self, slot: &str) -> Result<&DistributionSpec> {
        let spec = self.measures.get(slot).ok_or_else(|| Error::config(format!("measures.{slot}"), "required"))?;
        spec.build().map_err(|e| Error::config(format!("measures.{slot}"), e.to_string()))?;
        Ok(spec)
    }

    fn optional_measure(&self, slot: &str) -> Result<Option<&DistributionSpec>> {
        if self.measures.contains_key(slot) {
            self.measure(slot).map(Some)
        } else {
            Ok(None)
        }
    }

    fn kind_of(&self, m: &LocalMap) -> Result<LatticeKind> {
        m.lattice_kind().ok_or_else(|| Error::config("model", format!("{} is not a lattice dynamics", m.name())))
    }

    fn eps_list(&self) -> Result<&[f64]> {
        let e = &self.test.eps_list;
        if e.is_empty() {
            return Err(Error::config("test.eps_list", "required"));
        }
        if e.iter().any(|&x| !(x > 0.0 && x.is_finite())) || e.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::config("test.eps_list", "must be positive and strictly decreasing"));
        }
        Ok(e)
    }

    fn positive(&self, field: &str, v: usize) -> Result<()> {
        if v == 0 {
            return Err(Error::config(format!("mc.{field}"), "must be at least 1"));
        }
        Ok(())
    }

    /// Experiment, model and measure compatibility, checked before any
    /// computation.
    pub fn validate(&self) -> Result<()> {
        use ExperimentKind as K;
        if !(self.test.alpha > 0.0 && self.test.alpha < 1.0) {
            return Err(Error::config("test.alpha", "must lie in (0, 1)"));
        }
        if self.test.bins < 2 {
            return Err(Error::config("test.bins", "must be at least 2"));
        }
        for slot in self.measures.keys() {
            self.measure(slot)?;
        }
        let needs_target = matches!(self.experiment, K::Ultradiscretization | K::Correspondence);
        if !needs_target && self.target.is_some() {
            return Err(Error::config("target", format!("not used by {}", self.experiment.name())));
        }
        if self.initial.is_some() && self.experiment != K::Simulate {
            return Err(Error::config("initial", "only used by simulate"));
        }
        match self.experiment {
            K::DetailedBalance => {
                let m = self.model()?;
                if self.kind_of(&m)? != LatticeKind::TypeI {
                    return Err(Error::config("model", "detailed_balance needs a type I map; use detailed_balance_star"));
                }
                self.measure("mu")?;
                self.measure("nu")?;
                self.positive("samples", self.mc.samples)?;
            }
            K::DetailedBalanceStar => {
                let m = self.model()?;
                if !matches!(m, LocalMap::UdTodaStar | LocalMap::DTodaStar) {
                    return Err(Error::config("model", "detailed_balance_star needs udTodaStar or dTodaStar"));
                }
                for s in ["mu", "nu", "mu_tilde", "nu_tilde"] {
                    self.measure(s)?;
                }
                self.positive("samples", self.mc.samples)?;
            }
            K::Invariance | K::Burke | K::ErgodicityReconstruction => {
                let m = self.model()?;
                let kind = self.kind_of(&m)?;
                if let LocalMap::DKdV { alpha, beta } = m {
                    if alpha * beta != 0.0 && alpha != beta {
                        return Err(Error::config("model", "dKdV needs alpha * beta = 0 or alpha = beta"));
                    }
                }
                self.measure("mu")?;
                match self.experiment {
                    K::Invariance => {
                        self.optional_measure("nu")?;
                        self.positive("window", self.mc.window)?;
                        self.positive("n_fields", self.mc.n_fields)?;
                    }
                    K::Burke => {
                        self.measure("nu")?;
                        self.positive("window", self.mc.window)?;
                        self.positive("time_steps", self.mc.time_steps)?;
                    }
                    _ => {
                        if kind != LatticeKind::TypeI {
                            return Err(Error::config("model", "ergodicity_reconstruction needs a type I map"));
                        }
                        self.measure("nu")?;
                        self.positive("window", self.mc.window)?;
                        self.positive("time_steps", self.mc.time_steps)?;
                        self.positive("n_fields", self.mc.n_fields)?;
                    }
                }
                if kind == LatticeKind::TypeII {
                    self.measure("mu_tilde")?;
                }
            }
            K::Ultradiscretization => {
                match self.target {
                    Some(Target::Ultra(t)) => {
                        t.limit().build().map_err(|e| Error::config("target", e.to_string()))?;
                    }
                    Some(Target::Side(_)) => return Err(Error::config("target", "expected an ultradiscretization target")),
                    None => return Err(Error::config("target", "required")),
                }
                self.eps_list()?;
                self.positive("samples", self.mc.samples)?;
            }
            K::Correspondence => {
                match self.target {
                    Some(Target::Side(s)) => {
                        for d in s.triple() {
                            d.build().map_err(|e| Error::config("target", e.to_string()))?;
                        }
                    }
                    Some(Target::Ultra(_)) => return Err(Error::config("target", "expected a correspondence side")),
                    None => return Err(Error::config("target", "required")),
                }
                self.eps_list()?;
                self.positive("samples", self.mc.samples)?;
            }
            K::StochasticQuadrant => {
                let m = self.model()?;
                if !matches!(m, LocalMap::RDlpp | LocalMap::RRps | LocalMap::RRpe { .. } | LocalMap::RHsv { .. }) {
                    return Err(Error::config("model", format!("{} is not a quadrant kernel", m.name())));
                }
                self.measure("boundary_x")?;
                self.measure("boundary_u")?;
                if !matches!(m, LocalMap::RHsv { .. }) {
                    self.measure("bulk")?;
                }
                if self.mc.window < 2 {
                    return Err(Error::config("mc.window", "quadrant size must be at least 2"));
                }
                self.positive("samples", self.mc.samples)?;
            }
            K::Simulate => {
                let m = self.model()?;
                let kind = self.kind_of(&m)?;
                match &self.initial {
                    Some(row) => {
                        LatticeWindow::new(m, row.offset, row.values.clone())
                            .map_err(|e| Error::config("initial", e.to_string()))?;
                    }
                    None => {
                        self.measure("mu")?;
                        if kind == LatticeKind::TypeII {
                            self.measure("mu_tilde")?;
                        }
                        self.positive("window", self.mc.window)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Result of one experiment.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Reports(Vec<TestReport>),
    Field(SpaceTimeField),
}

impl Outcome {
    /// Whether every report passes; fields always pass.
    pub fn pass(&self) -> bool {
        match self {
            Outcome::Reports(r) => r.iter().all(|r| r.pass),
            Outcome::Field(_) => true,
        }
    }
}

fn spec(s: &DistributionSpec) -> Result<Distribution> {
    s.build()
}

/// Validate and run one experiment. All randomness derives from `mc.seed`.
pub fn run_experiment(c: &ExperimentConfig) -> Result<Outcome> {
    use ExperimentKind as K;
    c.validate()?;
    let rng = RngStream::new(c.mc.seed);
    let s = c.test.settings();
    let mc = &c.mc;
    let report = match c.experiment {
        K::DetailedBalance => {
            check_detailed_balance(&c.model()?, c.measure("mu")?, c.measure("nu")?, mc.samples, &rng, &s)?
        }
        K::DetailedBalanceStar => check_detailed_balance_star(
            &c.model()?,
            c.measure("mu")?,
            c.measure("nu")?,
            c.measure("mu_tilde")?,
            c.measure("nu_tilde")?,
            mc.samples,
            &rng,
            &s,
        )?,
        K::Invariance => check_invariance(
            &c.model()?,
            c.measure("mu")?,
            c.optional_measure("mu_tilde")?,
            c.optional_measure("nu")?,
            mc.window,
            mc.margin,
            mc.n_fields,
            &rng,
            &s,
        )?,
        K::Burke => check_burke(
            &c.model()?,
            c.measure("mu")?,
            c.optional_measure("mu_tilde")?,
            c.measure("nu")?,
            mc.window,
            mc.time_steps,
            &rng,
            &s,
        )?,
        K::ErgodicityReconstruction => check_ergodicity_reconstruction(
            &c.model()?,
            c.measure("mu")?,
            c.measure("nu")?,
            mc.window,
            mc.time_steps,
            mc.n_fields,
            &rng,
            &s,
        )?,
        K::Ultradiscretization => {
            let Some(Target::Ultra(t)) = c.target else { unreachable!("validated") };
            check_ultradiscretization(&t, c.eps_list()?, mc.samples, &rng, &s)?
        }
        K::Correspondence => {
            let Some(Target::Side(side)) = c.target else { unreachable!("validated") };
            check_correspondence(&side, mc.samples, c.eps_list()?, &rng, &s)?
        }
        K::StochasticQuadrant => {
            let uniform = DistributionSpec::uniform01();
            let bulk = c.optional_measure("bulk")?.unwrap_or(&uniform);
            check_quadrant_stationarity(
                &c.model()?,
                c.measure("boundary_x")?,
                c.measure("boundary_u")?,
                bulk,
                mc.window,
                mc.samples,
                &rng,
                &s,
            )?
        }
        K::Simulate => return simulate(c).map(Outcome::Field),
    };
    Ok(Outcome::Reports(vec![report]))
}

/// Evolve the initial row of a `simulate` experiment by `mc.time_steps`.
pub fn simulate(c: &ExperimentConfig) -> Result<SpaceTimeField> {
    c.validate()?;
    if c.experiment != ExperimentKind::Simulate {
        return Err(Error::config("experiment", "expected simulate"));
    }
    let m = c.model()?;
    let window = match &c.initial {
        Some(row) => LatticeWindow::new(m, row.offset, row.values.clone())?,
        None => {
            let mu = spec(c.measure("mu")?)?;
            let mt = c.optional_measure("mu_tilde")?.map(spec).transpose()?;
            LatticeWindow::sample(m, &mu, mt.as_ref(), 1, c.mc.window, &mut RngStream::new(c.mc.seed))?
        }
    };
    evolve_multi(&window, c.mc.time_steps, c.mc.margin)
}

/// Outcomes of a suite, in configuration order.
pub fn run_suite(suite: &Suite) -> Vec<Result<Outcome>> {
    suite.experiments.par_iter().map(run_experiment).collect()
}

#[derive(Serialize)]
struct ReportRecord<'a> {
    experiment: String,
    model: String,
    #[serde(flatten)]
    report: &'a TestReport,
}

/// Reports as a JSON array, one object per report with `experiment` and
/// `model` labels.
pub fn reports_json(runs: &[(&ExperimentConfig, &[TestReport])]) -> Result<String> {
    let records: Vec<ReportRecord> = runs
        .iter()
        .flat_map(|(c, rs)| rs.iter().map(move |r| ReportRecord { experiment: c.label(), model: c.model_label(), report: r }))
        .collect();
    let mut s = serde_json::to_string_pretty(&records).map_err(|e| Error::Io(e.into()))?;
    s.push('\n');
    Ok(s)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Reports as CSV with columns
/// `experiment,model,statistic_name,value,threshold,pass,n,seed`.
pub fn reports_csv(runs: &[(&ExperimentConfig, &[TestReport])]) -> String {
    let mut s = String::from("experiment,model,statistic_name,value,threshold,pass,n,seed\n");
    for (c, rs) in runs {
        for r in rs.iter() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                csv_field(&c.label()),
                csv_field(&c.model_label()),
                csv_field(&r.statistic_name),
                r.statistic,
                r.threshold,
                r.pass,
                r.n_samples,
                r.seed
            );
        }
    }
    s
}

/// Write reports to `path` atomically in `format`.
pub fn write_reports(runs: &[(&ExperimentConfig, &[TestReport])], path: &Path, format: OutputFormat) -> Result<()> {
    let text = match format {
        OutputFormat::Json => reports_json(runs)?,
        OutputFormat::Csv => reports_csv(runs),
    };
    write_atomic(path, text.as_bytes())
}

/// Plot-ready CSV kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    /// Columns `eps,ks`.
    KsCurve,
    /// Columns `t,n,value`.
    FieldHeatmap,
    /// Columns `bin_left,bin_right,count,expected`.
    MarginalHist,
}

/// Input of [`emit_plot_data`].
#[derive(Clone, Copy, Debug)]
pub enum PlotInput<'a> {
    /// A limit report with `eps[i]` and `ks[i]` details.
    Report(&'a TestReport),
    /// A simulated space-time field.
    Field(&'a SpaceTimeField),
    /// Rows of a field indexed `[t][n - 1]`.
    Grid(&'a [Vec<f64>]),
    /// A sample with its reference law and bin count.
    Sample { values: &'a [f64], law: &'a Distribution, bins: usize },
}

/// Plot-ready CSV with a one-line header.
pub fn emit_plot_data(input: PlotInput<'_>, kind: PlotKind) -> Result<String> {
    match (kind, input) {
        (PlotKind::KsCurve, PlotInput::Report(r)) => {
            if !r.details.contains_key("eps[0]") {
                return Err(Error::KindMismatch(format!("report `{}` has no KS curve", r.name)));
            }
            let mut s = String::from("eps,ks\n");
            for i in 0.. {
                let (Some(e), Some(k)) = (r.details.get(&format!("eps[{i}]")), r.details.get(&format!("ks[{i}]"))) else {
                    break;
                };
                let _ = writeln!(s, "{e},{k}");
            }
            Ok(s)
        }
        (PlotKind::FieldHeatmap, PlotInput::Field(f)) => {
            let mut s = String::from("t,n,value\n");
            for (t, row) in f.rows.iter().enumerate() {
                for n in row.offset..row.end() {
                    match row.kind {
                        LatticeKind::TypeI => {
                            let _ = writeln!(s, "{t},{n},{}", row.x(n));
                        }
                        LatticeKind::TypeII => {
                            let (q, e) = row.pair(n);
                            let _ = writeln!(s, "{t},{},{q}", 2 * n - 1);
                            let _ = writeln!(s, "{t},{},{e}", 2 * n);
                        }
                    }
                }
            }
            Ok(s)
        }
        (PlotKind::FieldHeatmap, PlotInput::Grid(rows)) => {
            let mut s = String::from("t,n,value\n");
            for (t, row) in rows.iter().enumerate() {
                for (i, v) in row.iter().enumerate() {
                    let _ = writeln!(s, "{t},{},{v}", i + 1);
                }
            }
            Ok(s)
        }
        (PlotKind::MarginalHist, PlotInput::Sample { values, law, bins }) => {
            if values.is_empty() {
                return Err(Error::EmptySample);
            }
            if bins == 0 {
                return Err(Error::Domain("histogram needs at least one bin".into()));
            }
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
            let mut counts = vec![0usize; bins];
            for &v in values {
                counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
            }
            let n = values.len() as f64;
            let mut s = String::from("bin_left,bin_right,count,expected\n");
            for (i, &k) in counts.iter().enumerate() {
                let a = lo + i as f64 * width;
                let b = if i + 1 == bins { hi.max(a + width) } else { lo + (i + 1) as f64 * width };
                let left = if i == 0 && law.is_discrete() { law.cdf(a) - law.density(a) } else { law.cdf(a) };
                let expected = n * (law.cdf(b) - left);
                let _ = writeln!(s, "{a},{b},{k},{expected}");
            }
            Ok(s)
        }
        (kind, input) => Err(Error::KindMismatch(format!("{kind:?} cannot be drawn from {}", input_name(&input)))),
    }
}

fn input_name(input: &PlotInput<'_>) -> &'static str {
    match input {
        PlotInput::Report(_) => "a report",
        PlotInput::Field(_) => "a space-time field",
        PlotInput::Grid(_) => "a grid",
        PlotInput::Sample { .. } => "a sample",
    }
}
