//! Scaling limits: ultra-discretization of Gamma and GIG laws, and the
//! conditioning limits relating the Toda and KdV invariant measures.

use serde::{Deserialize, Serialize};

use super::report::{ReportBuilder, TestReport};
use super::stats::ks_one_sample;
use super::TestSettings;
use crate::distributions::{Distribution, DistributionSpec};
use crate::error::{Error, Result};
use crate::lattice_maps::{dkdv_map, dkdv_via_toda, udkdv_map, udkdv_via_toda};
use crate::rng::RngStream;

/// Largest `|ln|` of a scheduled parameter; `e^700` is near the top of the
/// binary64 range.
pub const MAX_LOG_PARAM: f64 = 700.0;

/// Largest single increase tolerated in a KS curve.
pub const KS_INVERSION: f64 = 0.005;

/// Final KS bound of the ultra-discretization check.
pub const ULTRA_FINAL_KS: f64 = 0.02;

/// Final KS bound of the conditioning limits.
pub const CONDITIONING_FINAL_KS: f64 = 0.03;

/// Smallest acceptance rate of the conditioning sampler.
pub const MIN_ACCEPTANCE: f64 = 1e-4;

/// Limit law approached by `±ε ln X(ε)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum UltraTarget {
    /// `X(ε) ~ GIG(ελ, e^((c-L)/ε), e^(c/ε))`; `ε ln X(ε) → stExp(λ, c, L - c)`.
    #[serde(rename = "stExp_from_GIG")]
    StExpFromGig { lambda: f64, c: f64, l: f64 },
    /// `X(ε) ~ Gam(ελ, e^(c/ε))`; `-ε ln X(ε) → sExp(λ, c)`.
    #[serde(rename = "sExp_from_Gam")]
    SExpFromGam { lambda: f64, c: f64 },
}

impl UltraTarget {
    /// Limit law.
    pub fn limit(&self) -> DistributionSpec {
        match *self {
            UltraTarget::StExpFromGig { lambda, c, l } => DistributionSpec::st_exp(lambda, c, l - c),
            UltraTarget::SExpFromGam { lambda, c } => DistributionSpec::s_exp(lambda, c),
        }
    }

    /// Scheduled law of `X(ε)` and the sign applied to `ε ln X(ε)`.
    pub fn schedule(&self, eps: f64) -> Result<(DistributionSpec, f64)> {
        let over = |v: f64| v.abs() > MAX_LOG_PARAM;
        match *self {
            UltraTarget::StExpFromGig { lambda, c, l } => {
                if over(c / eps) || over((c - l) / eps) {
                    return Err(Error::SamplerOverflow(format!("e^(c/eps), e^((c-L)/eps) out of range at eps = {eps}")));
                }
                Ok((DistributionSpec::gig(eps * lambda, ((c - l) / eps).exp(), (c / eps).exp()), 1.0))
            }
            UltraTarget::SExpFromGam { lambda, c } => {
                if over(c / eps) {
                    return Err(Error::SamplerOverflow(format!("e^(c/eps) out of range at eps = {eps}")));
                }
                Ok((DistributionSpec::gamma(eps * lambda, (c / eps).exp()), -1.0))
            }
        }
    }
}

fn check_eps_list(eps_list: &[f64]) -> Result<()> {
    if eps_list.is_empty() {
        return Err(Error::Domain("eps_list must be nonempty".into()));
    }
    if eps_list.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::Domain("eps values must be positive".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("eps_list must be strictly decreasing".into()));
    }
    Ok(())
}

/// Number of increases in `ks` and the largest one.
pub fn ks_inversions(ks: &[f64]) -> (usize, f64) {
    let ups: Vec<f64> = ks.windows(2).map(|w| w[1] - w[0]).filter(|&d| d > 0.0).collect();
    (ups.len(), ups.iter().copied().fold(0.0, f64::max))
}

/// KS curve of `±ε ln X(ε)` against the limit law over `eps_list`.
///
/// Passes when the curve has at most one increase, of at most
/// [`KS_INVERSION`], and the last value is below [`ULTRA_FINAL_KS`]. The
/// report details hold `eps[i]` and `ks[i]`.
pub fn check_ultradiscretization(
    target: &UltraTarget,
    eps_list: &[f64],
    n: usize,
    rng: &RngStream,
    settings: &TestSettings,
) -> Result<TestReport> {
    check_eps_list(eps_list)?;
    let limit = target.limit().build()?;
    let mut ks = Vec::with_capacity(eps_list.len());
    for (i, &eps) in eps_list.iter().enumerate() {
        let (spec, sign) = target.schedule(eps)?;
        let d = spec.build()?;
        let mut r = rng.child(i as u64);
        let ys: Vec<f64> = (0..n).map(|_| sign * eps * d.sample_ln(&mut r)).collect();
        ks.push(ks_one_sample(&ys, |y| limit.cdf(y))?.statistic);
    }
    let (count, largest) = ks_inversions(&ks);
    let mut rep = ReportBuilder::new("ultradiscretization", "eps ln X(eps) -> limit law", rng.seed(), settings.alpha);
    rep.bound("final_ks", *ks.last().unwrap(), ULTRA_FINAL_KS)
        .bound("ks_inversions", count as f64, 1.0)
        .bound("largest_ks_increase", largest, KS_INVERSION);
    for (i, (&e, &k)) in eps_list.iter().zip(&ks).enumerate() {
        rep.detail(format!("eps[{i}]"), e).detail(format!("ks[{i}]"), k);
    }
    Ok(rep.finish(n * eps_list.len()))
}

/// Side of the KdV/Toda correspondence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "side", rename_all = "snake_case")]
pub enum CorrespondenceSide {
    /// `(A, B, C) ~ sExp(λ1+λ2, c) × sExp(λ1, c) × sExp(λ2, c)` given
    /// `|A + B| ≤ ε`; conjugation of `udKdV(J, ∞)`.
    Ultra { lambda1: f64, lambda2: f64, c: f64, j: f64 },
    /// `(A, B, C) ~ Gam(λ1+λ2, c) × Gam(λ1, c) × Gam(λ2, c)` given
    /// `|AB - 1| ≤ ε`; conjugation of `dKdV(α, 0)`.
    Discrete { lambda1: f64, lambda2: f64, c: f64, alpha: f64 },
}

impl CorrespondenceSide {
    /// Laws of `(A, B, C)`.
    pub fn triple(&self) -> [DistributionSpec; 3] {
        match *self {
            CorrespondenceSide::Ultra { lambda1: l1, lambda2: l2, c, .. } => {
                [DistributionSpec::s_exp(l1 + l2, c), DistributionSpec::s_exp(l1, c), DistributionSpec::s_exp(l2, c)]
            }
            CorrespondenceSide::Discrete { lambda1: l1, lambda2: l2, c, .. } => {
                [DistributionSpec::gamma(l1 + l2, c), DistributionSpec::gamma(l1, c), DistributionSpec::gamma(l2, c)]
            }
        }
    }

    /// Limits of the conditional laws of `B` and `C`.
    pub fn limits(&self) -> [DistributionSpec; 2] {
        match *self {
            CorrespondenceSide::Ultra { lambda2: l2, c, .. } => {
                [DistributionSpec::st_exp(-l2, c, -c), DistributionSpec::s_exp(l2, c)]
            }
            CorrespondenceSide::Discrete { lambda2: l2, c, .. } => {
                [DistributionSpec::gig(l2, c, c), DistributionSpec::gamma(l2, c)]
            }
        }
    }

    fn accept(&self, a: f64, b: f64, eps: f64) -> bool {
        match self {
            CorrespondenceSide::Ultra { .. } => (a + b).abs() <= eps,
            CorrespondenceSide::Discrete { .. } => (a * b - 1.0).abs() <= eps,
        }
    }

    /// Largest deviation between the KdV map and its Toda-side conjugate on
    /// `points` random inputs (relative for the rational side).
    pub fn conjugation_error(&self, points: usize, rng: &mut RngStream) -> Result<f64> {
        let mut err = 0.0f64;
        for _ in 0..points {
            match *self {
                CorrespondenceSide::Ultra { j, .. } => {
                    let x = 8.0 * rng.open01() - 4.0;
                    let u = 8.0 * rng.open01() - 4.0;
                    let (p, q) = udkdv_map(j, f64::INFINITY, x, u);
                    let (r, s) = udkdv_via_toda(j, x, u);
                    err = err.max((p - r).abs()).max((q - s).abs());
                }
                CorrespondenceSide::Discrete { alpha, .. } => {
                    let x = (6.0 * rng.open01() - 3.0).exp();
                    let u = (6.0 * rng.open01() - 3.0).exp();
                    let (p, q) = dkdv_map(alpha, 0.0, x, u)?;
                    let (r, s) = dkdv_via_toda(alpha, x, u)?;
                    err = err.max(((p - r) / p).abs()).max(((q - s) / q).abs());
                }
            }
        }
        Ok(err)
    }

    fn validate(&self) -> Result<()> {
        let (l1, l2, c) = match *self {
            CorrespondenceSide::Ultra { lambda1, lambda2, c, j } => {
                if c >= 0.0 || !j.is_finite() {
                    return Err(Error::params("correspondence", "ultra side needs c < 0 and finite J"));
                }
                (lambda1, lambda2, c)
            }
            CorrespondenceSide::Discrete { lambda1, lambda2, c, alpha } => {
                if !(c > 0.0 && alpha > 0.0) {
                    return Err(Error::params("correspondence", "discrete side needs c > 0 and alpha > 0"));
                }
                (lambda1, lambda2, c)
            }
        };
        if !(l1 > 0.0 && l2 > 0.0 && c.is_finite()) {
            return Err(Error::params("correspondence", "lambda1, lambda2 must be positive"));
        }
        Ok(())
    }
}

/// Number of random points of the conjugation identity.
pub const CONJUGATION_POINTS: usize = 10_000;

/// Conjugation identity and conditioning limit of one correspondence side.
///
/// For every `ε` in `eps_list`, triples are drawn until `n` satisfy the
/// conditioning event; the KS distances of the accepted `B` and `C` to
/// their limits are recorded. Passes when the identity holds to `1e-12` on
/// [`CONJUGATION_POINTS`] points and both KS distances at the last `ε` are
/// below [`CONDITIONING_FINAL_KS`]. Fails with
/// [`Error::RejectionStarved`] when the acceptance rate drops below
/// [`MIN_ACCEPTANCE`].
pub fn check_correspondence(
    side: &CorrespondenceSide,
    n: usize,
    eps_list: &[f64],
    rng: &RngStream,
    settings: &TestSettings,
) -> Result<TestReport> {
    side.validate()?;
    check_eps_list(eps_list)?;
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let conj = side.conjugation_error(CONJUGATION_POINTS, &mut rng.child(0))?;
    let laws: Vec<Distribution> = side.triple().iter().map(|s| s.build()).collect::<Result<_>>()?;
    let limits: Vec<Distribution> = side.limits().iter().map(|s| s.build()).collect::<Result<_>>()?;
    let mut rep = ReportBuilder::new(
        "correspondence",
        "conditioned Toda triple -> KdV invariant pair",
        rng.seed(),
        settings.alpha,
    );
    rep.bound("conjugation_max_error", conj, 1e-12);
    let budget = (n as f64 / MIN_ACCEPTANCE).ceil() as usize;
    let (mut ks_b, mut ks_c) = (0.0, 0.0);
    for (i, &eps) in eps_list.iter().enumerate() {
        let mut r = rng.child(1 + i as u64);
        let (mut bs, mut cs) = (Vec::with_capacity(n), Vec::with_capacity(n));
        let mut drawn = 0usize;
        while bs.len() < n {
            if drawn >= budget {
                return Err(Error::RejectionStarved { rate: bs.len() as f64 / drawn as f64 });
            }
            drawn += 1;
            let a = laws[0].sample(&mut r);
            let b = laws[1].sample(&mut r);
            let c = laws[2].sample(&mut r);
            if side.accept(a, b, eps) {
                bs.push(b);
                cs.push(c);
            }
        }
        ks_b = ks_one_sample(&bs, |x| limits[0].cdf(x))?.statistic;
        ks_c = ks_one_sample(&cs, |x| limits[1].cdf(x))?.statistic;
        rep.detail(format!("eps[{i}]"), eps)
            .detail(format!("ks[{i}]"), f64::max(ks_b, ks_c))
            .detail(format!("ks_b[{i}]"), ks_b)
            .detail(format!("ks_c[{i}]"), ks_c)
            .detail(format!("acceptance[{i}]"), n as f64 / drawn as f64);
    }
    rep.bound("final_ks_b", ks_b, CONDITIONING_FINAL_KS).bound("final_ks_c", ks_c, CONDITIONING_FINAL_KS);
    Ok(rep.finish(n * eps_list.len()))
}
