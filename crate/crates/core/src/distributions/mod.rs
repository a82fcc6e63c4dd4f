//! Parametric laws used as marginals of invariant product measures.
//!
//! A [`DistributionSpec`] is the serializable description (family plus named
//! parameters). [`DistributionSpec::build`] validates it and returns a
//! [`Distribution`] with precomputed constants, ready for sampling and for
//! density, CDF and quantile evaluation.
//!
//! Parameter names per family:
//!
//! | family      | parameters                          | law |
//! |-------------|-------------------------------------|-----|
//! | `stExp`     | `lambda`, `c1`, `c2`                | density ∝ e^(-λx) on [c1, c2] |
//! | `sExp`      | `lambda`, `c`                       | density ∝ e^(-λx) on [c, ∞) |
//! | `sstbGeo`   | `theta`, `M`, `N`, `kappa`, `m`     | P(X = mx) ∝ θ^x κ^(x mod 2), x ∈ {M..N} |
//! | `ssGeo`     | `theta`, `M`, `m`                   | sstbGeo with N = ∞, κ = 1 |
//! | `AL`        | `lambda1`, `lambda2`                | density ∝ e^(-λ1 x) (x ≥ 0), e^(λ2 x) (x < 0) |
//! | `sdAL`      | `theta1`, `theta2`, `m`             | P(X = mx) ∝ θ1^x (x ≥ 0), θ2^(-x) (x < 0) |
//! | `Gam`       | `lambda`, `c`                       | density ∝ x^(λ-1) e^(-cx) |
//! | `IG`        | `lambda`, `c`                       | density ∝ x^(-λ-1) e^(-c/x) |
//! | `GIG`       | `lambda`, `c1`, `c2`                | density ∝ x^(-λ-1) e^(-c1 x - c2/x) |
//! | `Beta`      | `lambda1`, `lambda2`                | density ∝ x^(λ1-1) (1-x)^(λ2-1) |
//! | `qNB`       | `b`, `p`, `q` or `L`, `p`, `q`      | P(X = n) ∝ p^n (b;q)_n / (q;q)_n; `L` sets b = q^(-L) |
//! | `Dirac`     | `x`                                 | point mass |
//! | `Uniform01` | none                                | uniform on (0, 1) |

pub mod gamma;
pub mod gig;
pub mod quad;

use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, ln_beta};
use statrs::function::gamma::{digamma, gamma_lr, gamma_ur, ln_gamma};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::rng::RngStream;
use gamma::ln_gamma_draw;
use gig::{GigLog, GigSampler};
use quad::{LogScaleCdf, LogScaleDensity};

/// Distribution family tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "stExp")]
    StExp,
    #[serde(rename = "sExp")]
    SExp,
    #[serde(rename = "sstbGeo")]
    SstbGeo,
    #[serde(rename = "ssGeo")]
    SsGeo,
    #[serde(rename = "AL")]
    Al,
    #[serde(rename = "sdAL")]
    SdAl,
    #[serde(rename = "Gam")]
    Gam,
    #[serde(rename = "IG")]
    Ig,
    #[serde(rename = "GIG")]
    Gig,
    #[serde(rename = "Beta")]
    Beta,
    #[serde(rename = "qNB")]
    QNb,
    #[serde(rename = "Dirac")]
    Dirac,
    #[serde(rename = "Uniform01")]
    Uniform01,
}

impl Family {
    /// Name used in JSON and reports.
    pub fn name(self) -> &'static str {
        match self {
            Family::StExp => "stExp",
            Family::SExp => "sExp",
            Family::SstbGeo => "sstbGeo",
            Family::SsGeo => "ssGeo",
            Family::Al => "AL",
            Family::SdAl => "sdAL",
            Family::Gam => "Gam",
            Family::Ig => "IG",
            Family::Gig => "GIG",
            Family::Beta => "Beta",
            Family::QNb => "qNB",
            Family::Dirac => "Dirac",
            Family::Uniform01 => "Uniform01",
        }
    }
}

/// Serializable description of one law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub family: Family,
    #[serde(default)]
    pub params: Params,
}

impl DistributionSpec {
    fn new(family: Family, params: Params) -> Self {
        Self { family, params }
    }

    /// stExp(λ, c1, c2).
    pub fn st_exp(lambda: f64, c1: f64, c2: f64) -> Self {
        Self::new(Family::StExp, Params::new().with("lambda", lambda).with("c1", c1).with("c2", c2))
    }

    /// sExp(λ, c).
    pub fn s_exp(lambda: f64, c: f64) -> Self {
        Self::new(Family::SExp, Params::new().with("lambda", lambda).with("c", c))
    }

    /// sstbGeo(1-θ, M, N, κ, m), given θ.
    pub fn sstb_geo(theta: f64, lo: f64, hi: f64, kappa: f64, m: f64) -> Self {
        Self::new(
            Family::SstbGeo,
            Params::new()
                .with("theta", theta)
                .with("M", lo)
                .with("N", hi)
                .with("kappa", kappa)
                .with("m", m),
        )
    }

    /// ssGeo(1-θ, M, m), given θ.
    pub fn ss_geo(theta: f64, lo: f64, m: f64) -> Self {
        Self::new(Family::SsGeo, Params::new().with("theta", theta).with("M", lo).with("m", m))
    }

    /// AL(λ1, λ2).
    pub fn al(lambda1: f64, lambda2: f64) -> Self {
        Self::new(Family::Al, Params::new().with("lambda1", lambda1).with("lambda2", lambda2))
    }

    /// sdAL(1-θ1, 1-θ2, m), given θ1, θ2.
    pub fn sd_al(theta1: f64, theta2: f64, m: f64) -> Self {
        Self::new(
            Family::SdAl,
            Params::new().with("theta1", theta1).with("theta2", theta2).with("m", m),
        )
    }

    /// Gam(λ, c) with density ∝ x^(λ-1) e^(-cx).
    pub fn gamma(lambda: f64, c: f64) -> Self {
        Self::new(Family::Gam, Params::new().with("lambda", lambda).with("c", c))
    }

    /// IG(λ, c) with density ∝ x^(-λ-1) e^(-c/x).
    pub fn inv_gamma(lambda: f64, c: f64) -> Self {
        Self::new(Family::Ig, Params::new().with("lambda", lambda).with("c", c))
    }

    /// GIG(λ, c1, c2).
    pub fn gig(lambda: f64, c1: f64, c2: f64) -> Self {
        Self::new(Family::Gig, Params::new().with("lambda", lambda).with("c1", c1).with("c2", c2))
    }

    /// Be(λ1, λ2).
    pub fn beta(lambda1: f64, lambda2: f64) -> Self {
        Self::new(Family::Beta, Params::new().with("lambda1", lambda1).with("lambda2", lambda2))
    }

    /// qNB(b, p) at deformation `q`.
    pub fn qnb(b: f64, p: f64, q: f64) -> Self {
        Self::new(Family::QNb, Params::new().with("b", b).with("p", p).with("q", q))
    }

    /// qNB(q^(-L), p) at deformation `q`; finite support {0..L} when `p < 0`.
    pub fn qnb_finite(l: u32, p: f64, q: f64) -> Self {
        Self::new(Family::QNb, Params::new().with("L", l as f64).with("p", p).with("q", q))
    }

    /// Point mass at `x`.
    pub fn dirac(x: f64) -> Self {
        Self::new(Family::Dirac, Params::new().with("x", x))
    }

    /// Uniform law on (0, 1).
    pub fn uniform01() -> Self {
        Self::new(Family::Uniform01, Params::new())
    }

    /// Validate and precompute.
    pub fn build(&self) -> Result<Distribution> {
        Distribution::from_spec(self)
    }

    /// `n` i.i.d. draws.
    pub fn sample(&self, rng: &mut RngStream, n: usize) -> Result<Vec<f64>> {
        Ok(self.build()?.sample_n(rng, n))
    }

    /// Density (continuous) or pmf (discrete) at `x`.
    pub fn density(&self, x: f64) -> Result<f64> {
        Ok(self.build()?.density(x))
    }

    /// Exact pmf table of a finite discrete law.
    pub fn exact_pmf_table(&self) -> Result<PmfTable> {
        self.build()?.exact_pmf_table()
    }
}

/// Finite pmf table sorted by support point.
#[derive(Clone, Debug, PartialEq)]
pub struct PmfTable {
    pub points: Vec<(f64, f64)>,
}

impl PmfTable {
    /// Table from unsorted points; equal support points are merged.
    pub fn from_points(mut pts: Vec<(f64, f64)>) -> Self {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
        for (x, p) in pts {
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 += p,
                _ => out.push((x, p)),
            }
        }
        Self { points: out }
    }

    /// Probability of `x` (zero off the table).
    pub fn get(&self, x: f64) -> f64 {
        match self.points.binary_search_by(|p| p.0.total_cmp(&x)) {
            Ok(i) => self.points[i].1,
            Err(_) => 0.0,
        }
    }

    /// Total mass.
    pub fn total(&self) -> f64 {
        self.points.iter().map(|p| p.1).sum()
    }

    /// Number of support points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// True when the table has no points.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Inverse-CDF draw.
    pub fn sample(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for &(x, p) in &self.points {
            acc += p;
            if u < acc {
                return x;
            }
        }
        self.points.last().map(|p| p.0).unwrap_or(f64::NAN)
    }
}

/// Validated law with precomputed constants.
#[derive(Debug)]
pub struct Distribution {
    spec: DistributionSpec,
    kind: Kind,
}

#[derive(Debug)]
enum Kind {
    /// Truncated exponential on [c1, c2] with rate λ (c2 may be ∞).
    StExp { lambda: f64, c1: f64, c2: f64 },
    /// Lattice law on m·{lo..hi} with weights θ^x κ^(x mod 2).
    SstbGeo {
        ln_theta: f64,
        ln_kappa: f64,
        lo: i64,
        hi: Option<i64>,
        m: f64,
        table: Option<PmfTable>,
        ln_z: f64,
    },
    Al { l1: f64, l2: f64 },
    SdAl { t1: f64, t2: f64, m: f64 },
    Gam { lambda: f64, c: f64 },
    Ig { lambda: f64, c: f64 },
    Gig { lambda: f64, c1: f64, c2: f64, sampler: GigSampler, table: OnceLock<LogScaleCdf> },
    Beta { a: f64, b: f64 },
    QNb { table: PmfTable, finite: bool },
    Dirac { x: f64 },
    Uniform,
}

/// Pochhammer symbol (a; q)_∞ evaluated by truncated product.
pub fn q_pochhammer_inf(a: f64, q: f64) -> f64 {
    let mut prod = 1.0;
    let mut term = a;
    for _ in 0..100_000 {
        prod *= 1.0 - term;
        term *= q;
        if term.abs() < 1e-18 {
            break;
        }
    }
    prod
}

const SLACK: f64 = 1e-12;

fn lattice_index(x: f64, m: f64) -> Option<i64> {
    let k = x / m;
    let r = k.round();
    if (k - r).abs() <= 1e-9 * (1.0 + r.abs()) {
        Some(r as i64)
    } else {
        None
    }
}

pub(crate) fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

impl Distribution {
    fn from_spec(spec: &DistributionSpec) -> Result<Self> {
        let p = &spec.params;
        let fam = spec.family.name();
        let positive = |name: &str| -> Result<f64> {
            let v = p.require(fam, name)?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::params(fam, format!("`{name}` must be positive and finite")));
            }
            Ok(v)
        };
        let kind = match spec.family {
            Family::StExp => {
                let lambda = p.require(fam, "lambda")?;
                let c1 = p.require(fam, "c1")?;
                let c2 = p.require(fam, "c2")?;
                if !lambda.is_finite() || !c1.is_finite() || c2.is_nan() {
                    return Err(Error::params(fam, "lambda and c1 must be finite"));
                }
                if !(c1 < c2) {
                    return Err(Error::params(fam, "requires c1 < c2"));
                }
                if c2 == f64::INFINITY && lambda <= 0.0 {
                    return Err(Error::params(fam, "requires lambda > 0 when c2 is infinite"));
                }
                Kind::StExp { lambda, c1, c2 }
            }
            Family::SExp => {
                let lambda = positive("lambda")?;
                let c = p.require(fam, "c")?;
                if !c.is_finite() {
                    return Err(Error::params(fam, "c must be finite"));
                }
                Kind::StExp { lambda, c1: c, c2: f64::INFINITY }
            }
            Family::SstbGeo | Family::SsGeo => {
                let theta = positive("theta")?;
                let lo = p.require_int(fam, "M")?;
                let m = positive("m")?;
                let (hi, kappa) = if spec.family == Family::SsGeo {
                    (f64::INFINITY, 1.0)
                } else {
                    (p.require_int(fam, "N")?, positive("kappa")?)
                };
                if !lo.is_finite() {
                    return Err(Error::params(fam, "M must be finite"));
                }
                if lo > hi {
                    return Err(Error::params(fam, "requires M <= N"));
                }
                if hi.is_infinite() && theta >= 1.0 {
                    return Err(Error::params(fam, "requires theta < 1 when N is infinite"));
                }
                let lo = lo as i64;
                let ln_theta = theta.ln();
                let ln_kappa = kappa.ln();
                if hi.is_finite() {
                    let hi = hi as i64;
                    if hi - lo > 10_000_000 {
                        return Err(Error::params(fam, "support too large"));
                    }
                    let lw: Vec<f64> = (lo..=hi)
                        .map(|x| x as f64 * ln_theta + (x.rem_euclid(2)) as f64 * ln_kappa)
                        .collect();
                    let mx = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let w: Vec<f64> = lw.iter().map(|l| (l - mx).exp()).collect();
                    let z: f64 = w.iter().sum();
                    let table = PmfTable {
                        points: (lo..=hi).zip(w.iter()).map(|(x, wi)| (m * x as f64, wi / z)).collect(),
                    };
                    Kind::SstbGeo {
                        ln_theta,
                        ln_kappa,
                        lo,
                        hi: Some(hi),
                        m,
                        table: Some(table),
                        ln_z: mx + z.ln(),
                    }
                } else {
                    // Z = θ^M (κ^ι(M) + θ κ^ι(M+1)) / (1 - θ²)
                    let pm = lo.rem_euclid(2) as f64;
                    let pair = log_sum_exp(pm * ln_kappa, ln_theta + (1.0 - pm) * ln_kappa);
                    let ln_z = lo as f64 * ln_theta + pair - (-(2.0 * ln_theta).exp()).ln_1p();
                    Kind::SstbGeo { ln_theta, ln_kappa, lo, hi: None, m, table: None, ln_z }
                }
            }
            Family::Al => Kind::Al { l1: positive("lambda1")?, l2: positive("lambda2")? },
            Family::SdAl => {
                let t1 = positive("theta1")?;
                let t2 = positive("theta2")?;
                if t1 >= 1.0 || t2 >= 1.0 {
                    return Err(Error::params(fam, "requires theta1, theta2 in (0, 1)"));
                }
                Kind::SdAl { t1, t2, m: positive("m")? }
            }
            Family::Gam => Kind::Gam { lambda: positive("lambda")?, c: positive("c")? },
            Family::Ig => Kind::Ig { lambda: positive("lambda")?, c: positive("c")? },
            Family::Gig => {
                let lambda = p.require(fam, "lambda")?;
                let c1 = p.require(fam, "c1")?;
                let c2 = p.require(fam, "c2")?;
                if !lambda.is_finite() || !(c1 >= 0.0 && c1.is_finite()) || !(c2 > 0.0 && c2.is_finite()) {
                    return Err(Error::params(fam, "requires finite lambda, c1 >= 0, c2 > 0"));
                }
                if c1 == 0.0 {
                    if lambda <= 0.0 {
                        return Err(Error::params(fam, "GIG(lambda, 0, c) requires lambda > 0"));
                    }
                    Kind::Ig { lambda, c: c2 }
                } else {
                    Kind::Gig {
                        lambda,
                        c1,
                        c2,
                        sampler: GigSampler::new(lambda, c1, c2),
                        table: OnceLock::new(),
                    }
                }
            }
            Family::Beta => Kind::Beta { a: positive("lambda1")?, b: positive("lambda2")? },
            Family::QNb => Self::build_qnb(p)?,
            Family::Dirac => {
                let x = p.require(fam, "x")?;
                if !x.is_finite() {
                    return Err(Error::params(fam, "x must be finite"));
                }
                Kind::Dirac { x }
            }
            Family::Uniform01 => Kind::Uniform,
        };
        Ok(Self { spec: spec.clone(), kind })
    }

    fn build_qnb(p: &Params) -> Result<Kind> {
        let fam = "qNB";
        let q = p.require(fam, "q")?;
        let pp = p.require(fam, "p")?;
        if !(0.0..1.0).contains(&q) {
            return Err(Error::params(fam, "requires q in [0, 1)"));
        }
        if let Some(l) = p.get("L") {
            if !(l >= 0.0 && l.fract() == 0.0 && l.is_finite()) {
                return Err(Error::params(fam, "L must be a nonnegative integer"));
            }
            if !(pp < 0.0) {
                return Err(Error::params(fam, "b = q^-L requires p < 0"));
            }
            if q <= 0.0 {
                return Err(Error::params(fam, "b = q^-L requires q > 0"));
            }
            let l = l as i32;
            let mut w = vec![1.0];
            for n in 0..l {
                let prev = w[n as usize];
                w.push(prev * pp * (1.0 - q.powi(n - l)) / (1.0 - q.powi(n + 1)));
            }
            let z: f64 = w.iter().sum();
            let table = PmfTable {
                points: w.iter().enumerate().map(|(n, wi)| (n as f64, wi / z)).collect(),
            };
            return Ok(Kind::QNb { table, finite: true });
        }
        let b = p.require(fam, "b")?;
        if !(0.0..1.0).contains(&pp) || !(0.0..1.0).contains(&b) {
            return Err(Error::params(fam, "requires p, b in [0, 1) (or L with p < 0)"));
        }
        // Normalizer (pb; q)_∞ / (p; q)_∞ from the q-binomial theorem.
        let p0 = q_pochhammer_inf(pp, q) / q_pochhammer_inf(pp * b, q);
        let mut points = vec![(0.0, p0)];
        let mut acc = p0;
        let mut w = p0;
        let mut n = 0i32;
        while acc < 1.0 - 1e-12 && n < 1_000_000 {
            w *= pp * (1.0 - b * q.powi(n)) / (1.0 - q.powi(n + 1));
            n += 1;
            acc += w;
            points.push((n as f64, w));
            if w == 0.0 {
                break;
            }
        }
        Ok(Kind::QNb { table: PmfTable { points }, finite: false })
    }

    /// Specification this law was built from.
    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    /// True for lattice-valued laws.
    pub fn is_discrete(&self) -> bool {
        matches!(
            self.kind,
            Kind::SstbGeo { .. } | Kind::SdAl { .. } | Kind::QNb { .. } | Kind::Dirac { .. }
        )
    }

    /// True for laws with a finite support table.
    pub fn is_finite_discrete(&self) -> bool {
        match &self.kind {
            Kind::SstbGeo { hi, .. } => hi.is_some(),
            Kind::QNb { finite, .. } => *finite,
            Kind::Dirac { .. } => true,
            _ => false,
        }
    }

    /// Closed support bounds.
    pub fn support(&self) -> (f64, f64) {
        match &self.kind {
            Kind::StExp { c1, c2, .. } => (*c1, *c2),
            Kind::SstbGeo { lo, hi, m, .. } => {
                (m * *lo as f64, hi.map(|h| m * h as f64).unwrap_or(f64::INFINITY))
            }
            Kind::Al { .. } | Kind::SdAl { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Kind::Gam { .. } | Kind::Ig { .. } | Kind::Gig { .. } => (0.0, f64::INFINITY),
            Kind::Beta { .. } | Kind::Uniform => (0.0, 1.0),
            Kind::QNb { table, finite } => {
                let hi = if *finite { table.points.last().unwrap().0 } else { f64::INFINITY };
                (0.0, hi)
            }
            Kind::Dirac { x } => (*x, *x),
        }
    }

    /// Support membership with closed-interval slack.
    pub fn in_support(&self, x: f64) -> bool {
        let (lo, hi) = self.support();
        let slack = SLACK * (1.0 + x.abs());
        if x < lo - slack || x > hi + slack {
            return false;
        }
        if self.is_discrete() {
            return self.density(x) > 0.0;
        }
        true
    }

    /// One draw.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match &self.kind {
            Kind::StExp { lambda, c1, c2 } => st_exp_quantile(*lambda, *c1, *c2, rng.open01()),
            Kind::SstbGeo { ln_theta, ln_kappa, lo, hi, m, table, .. } => match table {
                Some(t) => t.sample(rng.open01()),
                None => {
                    let pm = lo.rem_euclid(2) as f64;
                    let first = pm * ln_kappa;
                    let second = ln_theta + (1.0 - pm) * ln_kappa;
                    let p_second = 1.0 / (1.0 + (first - second).exp());
                    let k = (rng.open01().ln() / (2.0 * ln_theta)).floor();
                    let extra = if rng.open01() < p_second { 1.0 } else { 0.0 };
                    let _ = hi;
                    m * (*lo as f64 + 2.0 * k + extra)
                }
            },
            Kind::Al { l1, l2 } => al_quantile(*l1, *l2, rng.open01()),
            Kind::SdAl { t1, t2, m } => {
                let z = 1.0 / (1.0 - t1) + t2 / (1.0 - t2);
                let p_neg = t2 / (1.0 - t2) / z;
                if rng.open01() < p_neg {
                    -m * (1.0 + (rng.open01().ln() / t2.ln()).floor())
                } else {
                    m * (rng.open01().ln() / t1.ln()).floor()
                }
            }
            Kind::Gam { lambda, c } => (ln_gamma_draw(*lambda, rng) - c.ln()).exp(),
            Kind::Ig { lambda, c } => (c.ln() - ln_gamma_draw(*lambda, rng)).exp(),
            Kind::Gig { sampler, .. } => sampler.sample_ln(rng).exp(),
            Kind::Beta { a, b } => {
                let la = ln_gamma_draw(*a, rng);
                let lb = ln_gamma_draw(*b, rng);
                (la - log_sum_exp(la, lb)).exp()
            }
            Kind::QNb { table, .. } => table.sample(rng.open01()),
            Kind::Dirac { x } => *x,
            Kind::Uniform => rng.open01(),
        }
    }

    /// `n` i.i.d. draws.
    pub fn sample_n(&self, rng: &mut RngStream, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }

    /// `ln X` of one draw. Gam, IG and GIG are drawn on the log scale and
    /// stay finite when `X` itself would underflow or overflow.
    pub fn sample_ln(&self, rng: &mut RngStream) -> f64 {
        match &self.kind {
            Kind::Gam { lambda, c } => ln_gamma_draw(*lambda, rng) - c.ln(),
            Kind::Ig { lambda, c } => c.ln() - ln_gamma_draw(*lambda, rng),
            Kind::Gig { sampler, .. } => sampler.sample_ln(rng),
            _ => self.sample(rng).ln(),
        }
    }

    /// Density (continuous) or pmf (discrete) at `x`.
    pub fn density(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::StExp { lambda, c1, c2 } => st_exp_density(*lambda, *c1, *c2, x),
            Kind::SstbGeo { ln_theta, ln_kappa, lo, hi, m, ln_z, .. } => match lattice_index(x, *m) {
                Some(k) if k >= *lo && hi.is_none_or(|h| k <= h) => {
                    (k as f64 * ln_theta + k.rem_euclid(2) as f64 * ln_kappa - ln_z).exp()
                }
                _ => 0.0,
            },
            Kind::Al { l1, l2 } => {
                let z = 1.0 / l1 + 1.0 / l2;
                if x >= 0.0 {
                    (-l1 * x).exp() / z
                } else {
                    (l2 * x).exp() / z
                }
            }
            Kind::SdAl { t1, t2, m } => match lattice_index(x, *m) {
                Some(k) => {
                    let z = 1.0 / (1.0 - t1) + t2 / (1.0 - t2);
                    if k >= 0 {
                        t1.powi(k as i32) / z
                    } else {
                        t2.powi((-k) as i32) / z
                    }
                }
                None => 0.0,
            },
            Kind::Gam { lambda, c } => {
                if x <= 0.0 {
                    0.0
                } else {
                    ((lambda - 1.0) * x.ln() - c * x + lambda * c.ln() - ln_gamma(*lambda)).exp()
                }
            }
            Kind::Ig { lambda, c } => {
                if x <= 0.0 {
                    0.0
                } else {
                    (-(lambda + 1.0) * x.ln() - c / x + lambda * c.ln() - ln_gamma(*lambda)).exp()
                }
            }
            Kind::Gig { lambda, c1, c2, .. } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let lz = self.gig_table().log_z;
                    (-(lambda + 1.0) * x.ln() - c1 * x - c2 / x - lz).exp()
                }
            }
            Kind::Beta { a, b } => {
                if x <= 0.0 || x >= 1.0 {
                    0.0
                } else {
                    ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(*a, *b)).exp()
                }
            }
            Kind::QNb { table, .. } => match lattice_index(x, 1.0) {
                Some(k) if k >= 0 => table.points.get(k as usize).map(|p| p.1).unwrap_or(0.0),
                _ => 0.0,
            },
            Kind::Dirac { x: a } => {
                if x == *a {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::Uniform => {
                if (0.0..=1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn gig_table(&self) -> &LogScaleCdf {
        match &self.kind {
            Kind::Gig { lambda, c1, c2, table, .. } => {
                table.get_or_init(|| LogScaleCdf::build(&GigLog::new(*lambda, *c1, *c2), 8193))
            }
            _ => unreachable!("gig_table on a non-GIG law"),
        }
    }

    /// Log of the GIG normalizer `∫ x^(-λ-1) e^(-c1 x - c2/x) dx`, by
    /// adaptive quadrature on the log scale (tolerance 1e-10 relative).
    pub fn gig_log_normalizer(&self) -> Option<f64> {
        match &self.kind {
            Kind::Gig { lambda, c1, c2, .. } => {
                let d = GigLog::new(*lambda, *c1, *c2);
                let (lo, hi) = quad::effective_range(&d, 46.0);
                let g0 = d.log_g(d.mode());
                let z = quad::adaptive_simpson(&|t| (d.log_g(t) - g0).exp(), lo, hi, 1e-10 * d.scale());
                Some(g0 + z.ln())
            }
            _ => None,
        }
    }

    /// Cumulative distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::StExp { lambda, c1, c2 } => st_exp_cdf(*lambda, *c1, *c2, x),
            Kind::Al { l1, l2 } => {
                let z = 1.0 / l1 + 1.0 / l2;
                if x < 0.0 {
                    (l2 * x).exp() / (l2 * z)
                } else {
                    1.0 - (-l1 * x).exp() / (l1 * z)
                }
            }
            Kind::SdAl { t1, t2, m } => {
                let k = (x / m + 1e-9).floor();
                let z = 1.0 / (1.0 - t1) + t2 / (1.0 - t2);
                if k < 0.0 {
                    t2.powf(-k) / (1.0 - t2) / z
                } else {
                    1.0 - t1.powf(k + 1.0) / (1.0 - t1) / z
                }
            }
            Kind::SstbGeo { ln_theta, ln_kappa, lo, hi, m, table, ln_z } => match table {
                Some(t) => t.points.iter().take_while(|p| p.0 <= x + 1e-9 * m).map(|p| p.1).sum(),
                None => {
                    let k = (x / m + 1e-9).floor();
                    if k < *lo as f64 {
                        return 0.0;
                    }
                    let k = k as i64;
                    let _ = hi;
                    // Sum of the tail above k by pairs, subtracted from one.
                    let next = k + 1;
                    let pn = next.rem_euclid(2) as f64;
                    let pair = log_sum_exp(pn * ln_kappa, ln_theta + (1.0 - pn) * ln_kappa);
                    let ln_tail = next as f64 * ln_theta + pair - (-(2.0 * ln_theta).exp()).ln_1p() - ln_z;
                    1.0 - ln_tail.exp()
                }
            },
            Kind::Gam { lambda, c } => {
                if x <= 0.0 {
                    0.0
                } else {
                    gamma_lr(*lambda, c * x)
                }
            }
            Kind::Ig { lambda, c } => {
                if x <= 0.0 {
                    0.0
                } else {
                    gamma_ur(*lambda, c / x)
                }
            }
            Kind::Gig { .. } => {
                if x <= 0.0 {
                    0.0
                } else {
                    self.gig_table().cdf(x.ln())
                }
            }
            Kind::Beta { a, b } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    beta_reg(*a, *b, x)
                }
            }
            Kind::QNb { table, .. } => table.points.iter().take_while(|p| p.0 <= x).map(|p| p.1).sum(),
            Kind::Dirac { x: a } => {
                if x >= *a {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::Uniform => x.clamp(0.0, 1.0),
        }
    }

    /// Quantile function (generalized inverse of the CDF).
    pub fn quantile(&self, p: f64) -> f64 {
        match &self.kind {
            Kind::StExp { lambda, c1, c2 } => st_exp_quantile(*lambda, *c1, *c2, p),
            Kind::Al { l1, l2 } => al_quantile(*l1, *l2, p),
            Kind::Uniform => p,
            Kind::Dirac { x } => *x,
            Kind::Gig { .. } => self.gig_table().quantile(p).exp(),
            _ if self.is_discrete() => {
                let t = self.pmf_table(1e-15);
                let mut acc = 0.0;
                for &(x, q) in &t.points {
                    acc += q;
                    if acc >= p {
                        return x;
                    }
                }
                t.points.last().unwrap().0
            }
            _ => {
                // Bisection on the CDF over the positive half-line.
                let (mut a, mut b) = (0.0f64, 1.0f64);
                while self.cdf(b) < p {
                    b *= 2.0;
                }
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if self.cdf(m) < p {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                0.5 * (a + b)
            }
        }
    }

    /// Exact pmf table of a finite discrete law.
    pub fn exact_pmf_table(&self) -> Result<PmfTable> {
        match &self.kind {
            Kind::SstbGeo { table: Some(t), .. } => Ok(t.clone()),
            Kind::QNb { table, finite: true } => Ok(table.clone()),
            Kind::Dirac { x } => Ok(PmfTable { points: vec![(*x, 1.0)] }),
            _ => Err(Error::InfiniteSupport(self.spec.family.name().to_string())),
        }
    }

    /// Pmf table of a discrete law, truncated where the remaining tail mass
    /// drops below `tail` (exact for finite supports).
    pub fn pmf_table(&self, tail: f64) -> PmfTable {
        if let Ok(t) = self.exact_pmf_table() {
            return t;
        }
        match &self.kind {
            Kind::QNb { table, .. } => table.clone(),
            Kind::SstbGeo { lo, m, .. } => {
                let mut pts = Vec::new();
                let mut k = *lo;
                loop {
                    let x = m * k as f64;
                    pts.push((x, self.density(x)));
                    if 1.0 - self.cdf(x) < tail {
                        break;
                    }
                    k += 1;
                }
                PmfTable { points: pts }
            }
            Kind::SdAl { t1, t2, m } => {
                let kp = (tail.ln() / t1.ln()).ceil() as i64 + 1;
                let kn = (tail.ln() / t2.ln()).ceil() as i64 + 1;
                PmfTable::from_points((-kn..=kp).map(|k| (m * k as f64, self.density(m * k as f64))).collect())
            }
            _ => PmfTable { points: Vec::new() },
        }
    }

    /// Mean, where finite.
    pub fn mean(&self) -> f64 {
        match &self.kind {
            Kind::StExp { lambda, c1, c2 } => c1 + st_exp_mean_offset(*lambda, c2 - c1),
            Kind::Al { l1, l2 } => (1.0 / (l1 * l1) - 1.0 / (l2 * l2)) / (1.0 / l1 + 1.0 / l2),
            Kind::Gam { lambda, c } => lambda / c,
            Kind::Ig { lambda, c } => {
                if *lambda > 1.0 {
                    c / (lambda - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            Kind::Beta { a, b } => a / (a + b),
            Kind::Dirac { x } => *x,
            Kind::Uniform => 0.5,
            Kind::Gig { lambda, c1, c2, .. } => self.log_scale_moment(*lambda, *c1, *c2, |t| t.exp()),
            _ => self.pmf_table(1e-16).points.iter().map(|(x, p)| x * p).sum(),
        }
    }

    /// Mean of `ln X` for laws on the positive half-line.
    pub fn mean_ln(&self) -> Option<f64> {
        match &self.kind {
            Kind::Gam { lambda, c } => Some(digamma(*lambda) - c.ln()),
            Kind::Ig { lambda, c } => Some(c.ln() - digamma(*lambda)),
            Kind::Gig { lambda, c1, c2, .. } => Some(self.log_scale_moment(*lambda, *c1, *c2, |t| t)),
            Kind::Beta { a, b } => Some(digamma(*a) - digamma(a + b)),
            Kind::Dirac { x } if *x > 0.0 => Some(x.ln()),
            _ => None,
        }
    }

    fn log_scale_moment(&self, lambda: f64, c1: f64, c2: f64, f: impl Fn(f64) -> f64) -> f64 {
        let d = GigLog::new(lambda, c1, c2);
        let (lo, hi) = quad::effective_range(&d, 46.0);
        let g0 = d.log_g(d.mode());
        let tol = 1e-12 * d.scale();
        let z = quad::adaptive_simpson(&|t| (d.log_g(t) - g0).exp(), lo, hi, tol);
        let num = quad::adaptive_simpson(&|t| f(t) * (d.log_g(t) - g0).exp(), lo, hi, tol);
        num / z
    }
}

fn st_exp_mean_offset(lambda: f64, w: f64) -> f64 {
    if w.is_infinite() {
        return 1.0 / lambda;
    }
    if lambda == 0.0 {
        return 0.5 * w;
    }
    if lambda < 0.0 {
        return w - st_exp_mean_offset(-lambda, w);
    }
    1.0 / lambda - w / (lambda * w).exp_m1()
}

fn st_exp_cdf(lambda: f64, c1: f64, c2: f64, x: f64) -> f64 {
    if x <= c1 {
        return 0.0;
    }
    if x >= c2 {
        return 1.0;
    }
    if lambda == 0.0 {
        return (x - c1) / (c2 - c1);
    }
    if lambda < 0.0 {
        return 1.0 - st_exp_cdf(-lambda, -c2, -c1, -x);
    }
    if c2.is_infinite() {
        return -(-lambda * (x - c1)).exp_m1();
    }
    (-lambda * (x - c1)).exp_m1() / (-lambda * (c2 - c1)).exp_m1()
}

fn st_exp_density(lambda: f64, c1: f64, c2: f64, x: f64) -> f64 {
    if x < c1 || x > c2 {
        return 0.0;
    }
    if lambda == 0.0 {
        return 1.0 / (c2 - c1);
    }
    if lambda < 0.0 {
        return st_exp_density(-lambda, -c2, -c1, -x);
    }
    let z = if c2.is_infinite() {
        1.0 / lambda
    } else {
        -(-lambda * (c2 - c1)).exp_m1() / lambda
    };
    (-lambda * (x - c1)).exp() / z
}

fn st_exp_quantile(lambda: f64, c1: f64, c2: f64, p: f64) -> f64 {
    if lambda == 0.0 {
        return c1 + p * (c2 - c1);
    }
    if lambda < 0.0 {
        return -st_exp_quantile(-lambda, -c2, -c1, 1.0 - p);
    }
    let x = if c2.is_infinite() {
        c1 - (-p).ln_1p() / lambda
    } else {
        c1 - (p * (-lambda * (c2 - c1)).exp_m1()).ln_1p() / lambda
    };
    x.clamp(c1, c2)
}

fn al_quantile(l1: f64, l2: f64, p: f64) -> f64 {
    let z = 1.0 / l1 + 1.0 / l2;
    let p_neg = 1.0 / (l2 * z);
    if p < p_neg {
        (p * l2 * z).ln() / l2
    } else {
        -((1.0 - p) * l1 * z).ln() / l1
    }
}
