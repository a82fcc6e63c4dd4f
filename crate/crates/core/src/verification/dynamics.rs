//! Invariance under the time evolution, Burke's property and reconstruction
//! of a configuration column from its carrier column.

use rayon::prelude::*;

use super::balance::{record_independence, record_marginal};
use super::report::{ReportBuilder, TestReport};
use super::stats::{autocorrelation, ks_two_sample};
use super::TestSettings;
use crate::carrier_solver::{
    default_seeds, default_tol, evolve_one_step, reconstruct_from_carrier, solve_carrier_coupled,
    LatticeWindow,
};
use crate::distributions::{Distribution, DistributionSpec};
use crate::error::{Error, Result};
use crate::lattice_maps::{LatticeKind, LocalMap};
use crate::rng::RngStream;
use crate::stochastic_lattice::QuadrantField;

/// Stride between carrier values entering the carrier marginal test.
pub const CARRIER_STRIDE: usize = 64;

/// Largest lag of the carrier autocorrelation checks.
pub const MAX_LAG: usize = 4;

fn kind_of(model: &LocalMap) -> Result<LatticeKind> {
    model
        .lattice_kind()
        .ok_or_else(|| Error::UnsupportedFamily(format!("{} does not drive a lattice", model.name())))
}

fn type_ii_model(model: &LocalMap) -> LocalMap {
    match model {
        LocalMap::UdTodaStar => LocalMap::UdToda,
        LocalMap::DTodaStar => LocalMap::DToda,
        m => *m,
    }
}

/// `2 E[ln X] < -ln α` for `dKdV(α, 0)` with `α > 0`.
fn mean_log_condition(model: &LocalMap, law: &Distribution, role: &str) -> Result<()> {
    if let LocalMap::DKdV { alpha, beta } = *model {
        if alpha > 0.0 && beta == 0.0 {
            let ml = law
                .mean_ln()
                .ok_or_else(|| Error::Domain(format!("{role} has no finite mean of ln x")))?;
            if 2.0 * ml >= -alpha.ln() {
                return Err(Error::Domain(format!(
                    "mean-log condition fails for {role}: 2 E[ln x] = {} >= -ln alpha = {}",
                    2.0 * ml,
                    -alpha.ln()
                )));
            }
        }
    }
    Ok(())
}

/// Invariance of the i.i.d. measure under one time step.
///
/// Draws `n_fields` windows of `window + 2 margin` sites (type I) or
/// `window + 2 margin + 1` pairs (type II), evolves each by one step with a
/// coupled carrier, and tests the evolved central `window` sites against
/// `mu` (type I) or slotwise against `(mu_tilde, mu)` (type II). With `nu`
/// given, the realized carrier on the central region, thinned by
/// [`CARRIER_STRIDE`], is tested against `nu`. Any field whose carrier does
/// not synchronize within `margin` sites fails the whole check with
/// [`Error::NotSynchronized`].
#[allow(clippy::too_many_arguments)]
pub fn check_invariance(
    model: &LocalMap,
    mu: &DistributionSpec,
    mu_tilde: Option<&DistributionSpec>,
    nu: Option<&DistributionSpec>,
    window: usize,
    margin: usize,
    n_fields: usize,
    rng: &RngStream,
    settings: &TestSettings,
) -> Result<TestReport> {
    model.validate()?;
    let kind = kind_of(model)?;
    let model = type_ii_model(model);
    let m = mu.build()?;
    let mt = mu_tilde.map(|s| s.build()).transpose()?;
    let v = nu.map(|s| s.build()).transpose()?;
    if kind == LatticeKind::TypeII && mt.is_none() {
        return Err(Error::Domain("type II invariance needs mu_tilde".into()));
    }
    if window == 0 || n_fields == 0 {
        return Err(Error::Domain("window and n_fields must be positive".into()));
    }
    mean_log_condition(&model, &m, "mu")?;
    let seeds = default_seeds(&model, v.as_ref());
    let tol = default_tol(&model);
    let len = window + 2 * margin + usize::from(kind == LatticeKind::TypeII);
    let from = margin as i64;
    let to = from + window as i64;

    let per_field: Vec<Option<(Vec<f64>, Vec<f64>, Vec<f64>)>> = (0..n_fields)
        .into_par_iter()
        .map(|f| -> Result<Option<(Vec<f64>, Vec<f64>, Vec<f64>)>> {
            let mut r = rng.child(f as u64);
            let w = LatticeWindow::sample(model, &m, mt.as_ref(), 0, len, &mut r)?;
            let c = match solve_carrier_coupled(&w, seeds, tol) {
                Ok(c) => c,
                Err(Error::NotSynchronized { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            if c.offset > from {
                return Ok(None);
            }
            let next = evolve_one_step(&w, &c)?;
            let (mut a, mut b, mut u) = (Vec::new(), Vec::new(), Vec::new());
            for n in from..to {
                match kind {
                    LatticeKind::TypeI => a.push(next.x(n)),
                    LatticeKind::TypeII => {
                        let (q, e) = next.pair(n);
                        a.push(q);
                        b.push(e);
                    }
                }
                if ((n - from) as usize).is_multiple_of(CARRIER_STRIDE) {
                    u.push(c.get(n).ok_or_else(|| Error::Coverage(format!("carrier misses site {n}")))?);
                }
            }
            Ok(Some((a, b, u)))
        })
        .collect::<Result<_>>()?;
    let failed = per_field.iter().filter(|f| f.is_none()).count();
    if failed > 0 {
        return Err(Error::NotSynchronized { failed, total: n_fields });
    }
    let (mut a, mut b, mut u) = (Vec::new(), Vec::new(), Vec::new());
    for (fa, fb, fu) in per_field.into_iter().flatten() {
        a.extend(fa);
        b.extend(fb);
        u.extend(fu);
    }
    let mut rep = ReportBuilder::new(
        format!("invariance[{}]", model.name()),
        "T mu^Z = mu^Z; carrier ~ nu",
        rng.seed(),
        settings.alpha,
    );
    rep.detail("unsynchronized_fraction", 0.0);
    match kind {
        LatticeKind::TypeI => record_marginal(&mut rep, "ks_x", &a, &m)?,
        LatticeKind::TypeII => {
            record_marginal(&mut rep, "ks_q", &a, mt.as_ref().unwrap())?;
            record_marginal(&mut rep, "ks_e", &b, &m)?;
        }
    }
    if let Some(v) = &v {
        record_marginal(&mut rep, "ks_carrier", &u, v)?;
    }
    Ok(rep.finish(a.len() + b.len()))
}

/// Space-time field with i.i.d. boundary data.
struct BurkeField {
    /// `rows[t][n - 1] = x^t_n` for `t = 0..=t_steps`, `n = 1..=width`.
    rows: Vec<Vec<f64>>,
    /// `carriers[t][n] = u^t_n` for `t < t_steps`, `n = 0..=width`.
    carriers: Vec<Vec<f64>>,
}

/// Space-time field with i.i.d. (type I) or alternating (type II) boundary.
///
/// Type I: `x^0_n ~ mu`, `u^t_0 ~ nu`, every site runs `F`. Type II: sites
/// with `n + t` even run `F_*` and hold `x ~ mu`; the others run `F_*^{-1}`
/// and hold `x ~ mu_tilde`. The left boundary carrier is `u^t_0 ~ nu` for
/// odd `t` and `~ nu_tilde` for even `t`, where `nu_tilde` is sampled as the
/// second output of `F_*` on fresh `mu × nu` draws.
#[allow(clippy::too_many_arguments)]
fn burke_field(
    model: &LocalMap,
    kind: LatticeKind,
    m: &Distribution,
    mt: Option<&Distribution>,
    v: &Distribution,
    width: usize,
    t_steps: usize,
    rng: &RngStream,
) -> Result<BurkeField> {
    if kind == LatticeKind::TypeI {
        let bx = m.sample_n(&mut rng.child(0), width);
        let bu = v.sample_n(&mut rng.child(1), t_steps);
        let f = QuadrantField::fill(vec![*model], vec![0.0; width * t_steps], bx, bu)?;
        let rows = (0..=t_steps).map(|t| (1..=width).map(|n| f.u_at(n, t)).collect()).collect();
        let carriers = (1..=t_steps).map(|t| (0..=width).map(|n| f.v_at(n, t)).collect()).collect();
        return Ok(BurkeField { rows, carriers });
    }
    let star = model
        .star()
        .ok_or_else(|| Error::UnsupportedFamily(format!("{} has no star map", model.name())))?;
    let mt = mt.ok_or_else(|| Error::Domain("type II Burke check needs mu_tilde".into()))?;
    let (mut rx, mut ru) = (rng.child(0), rng.child(1));
    let mut row: Vec<f64> = (1..=width).map(|n| if n % 2 == 0 { m.sample(&mut rx) } else { mt.sample(&mut rx) }).collect();
    let mut rows = Vec::with_capacity(t_steps + 1);
    let mut carriers = Vec::with_capacity(t_steps);
    for t in 0..t_steps {
        let u0 = if t % 2 == 1 {
            v.sample(&mut ru)
        } else {
            star.apply2(m.sample(&mut ru), v.sample(&mut ru))?.1
        };
        let mut next = Vec::with_capacity(width);
        let mut cs = Vec::with_capacity(width + 1);
        cs.push(u0);
        let mut u = u0;
        for n in 1..=width {
            let (x, w) = if (n + t) % 2 == 0 { star.apply2(row[n - 1], u)? } else { star.apply2_inv(row[n - 1], u)? };
            next.push(x);
            cs.push(w);
            u = w;
        }
        rows.push(std::mem::replace(&mut row, next));
        carriers.push(cs);
    }
    rows.push(row);
    Ok(BurkeField { rows, carriers })
}

/// Standardize each parity class of `xs` by its own mean and deviation.
fn standardize_by_parity(xs: &[f64], classes: usize) -> Vec<f64> {
    let mut out = xs.to_vec();
    for c in 0..classes {
        let idx: Vec<usize> = (c..xs.len()).step_by(classes).collect();
        let k = idx.len() as f64;
        let mean = idx.iter().map(|&i| xs[i]).sum::<f64>() / k;
        let sd = (idx.iter().map(|&i| (xs[i] - mean).powi(2)).sum::<f64>() / k).sqrt();
        for &i in &idx {
            out[i] = if sd > 0.0 { (xs[i] - mean) / sd } else { 0.0 };
        }
    }
    out
}

/// Burke's property on a space-time field built as in the boundary
/// construction: `x^0_n` i.i.d. (`mu`, or alternating `mu`/`mu_tilde` for
/// type II) and left carriers `u^t_0` i.i.d. (`nu`, or alternating). Checks:
///
/// * lag `1..=4` autocorrelations of the carrier column at `n = width`,
///   after centring each parity class, lie within `3/√t_steps`;
/// * the outputs `(x^{t+1}_n, u^t_n)` of the cells on the anti-diagonal
///   `n + t = min(width, t_steps)` are independent; these cells lie on one
///   down-right path, so the pairs are i.i.d.;
/// * disjoint adjacent pairs `(x^t_{2k-1}, x^t_{2k})` of every row are
///   independent (when the row holds at least 200 values);
/// * every row against `mu` (and `mu_tilde`) and every carrier column
///   against `nu`. Type II carriers in `U~_0` are compared with the second
///   output of `F_*` on fresh `mu × nu` draws by a two-sample test.
#[allow(clippy::too_many_arguments)]
pub fn check_burke(
    model: &LocalMap,
    mu: &DistributionSpec,
    mu_tilde: Option<&DistributionSpec>,
    nu: &DistributionSpec,
    width: usize,
    t_steps: usize,
    rng: &RngStream,
    settings: &TestSettings,
) -> Result<TestReport> {
    model.validate()?;
    let kind = kind_of(model)?;
    let model = type_ii_model(model);
    if width < 2 || t_steps < 2 * MAX_LAG {
        return Err(Error::Domain(format!("Burke check needs width >= 2 and t_steps >= {}", 2 * MAX_LAG)));
    }
    let m = mu.build()?;
    let mt = mu_tilde.map(|s| s.build()).transpose()?;
    let v = nu.build()?;
    let f = burke_field(&model, kind, &m, mt.as_ref(), &v, width, t_steps, rng)?;
    let classes = if kind == LatticeKind::TypeI { 1 } else { 2 };
    let mut rep = ReportBuilder::new(
        format!("burke[{}]", model.name()),
        "rows, carrier columns i.i.d. and independent",
        rng.seed(),
        settings.alpha,
    );
    let column = |n: usize| -> Vec<f64> { f.carriers.iter().map(|c| c[n]).collect() };
    let last = standardize_by_parity(&column(width), classes);
    let bound = 3.0 / (t_steps as f64).sqrt();
    for lag in 1..=MAX_LAG {
        rep.bound(format!("autocorrelation_lag{lag}"), autocorrelation(&last, lag).abs(), bound);
    }

    let diag = width.min(t_steps);
    let pairs: Vec<(f64, f64)> = (1..=diag).map(|n| (f.rows[diag - n + 1][n - 1], f.carriers[diag - n][n])).collect();
    let bins = settings.bins.min(((pairs.len() / 25) as f64).sqrt().floor() as usize);
    if bins < 2 {
        return Err(Error::TooFewSamples { needed: 100, got: pairs.len() });
    }
    record_independence(&mut rep, "cell_independence", &pairs, bins)?;

    // Reference draws of the U~_0 carrier law.
    let tilde_ref = match kind {
        LatticeKind::TypeI => Vec::new(),
        LatticeKind::TypeII => {
            let star = model.star().unwrap();
            let mut r = rng.child(2);
            let k = 4 * t_steps;
            (0..k).map(|_| star.apply2(m.sample(&mut r), v.sample(&mut r)).map(|o| o.1)).collect::<Result<_>>()?
        }
    };
    let row_bins = settings.bins.min(((width / 2 / 25) as f64).sqrt().floor() as usize);
    for t in 1..=t_steps {
        let row = &f.rows[t];
        if row_bins >= 2 {
            let adjacent: Vec<(f64, f64)> = row.chunks_exact(2).map(|w| (w[0], w[1])).collect();
            record_independence(&mut rep, &format!("row{t}.pairs"), &adjacent, row_bins)?;
        }
        match kind {
            LatticeKind::TypeI => record_marginal(&mut rep, &format!("row{t}"), row, &m)?,
            LatticeKind::TypeII => {
                let pick = |p: usize| -> Vec<f64> { (1..=width).filter(|n| (n + t) % 2 == p).map(|n| row[n - 1]).collect() };
                record_marginal(&mut rep, &format!("row{t}.mu"), &pick(0), &m)?;
                record_marginal(&mut rep, &format!("row{t}.mu_tilde"), &pick(1), mt.as_ref().unwrap())?;
            }
        }
    }
    for n in 1..=width {
        let col = column(n);
        match kind {
            LatticeKind::TypeI => record_marginal(&mut rep, &format!("column{n}"), &col, &v)?,
            LatticeKind::TypeII => {
                let pick = |p: usize| -> Vec<f64> { (0..t_steps).filter(|t| (n + t) % 2 == p).map(|t| col[t]).collect() };
                record_marginal(&mut rep, &format!("column{n}.nu"), &pick(1), &v)?;
                let ks = ks_two_sample(&pick(0), &tilde_ref)?;
                rep.p_value(format!("column{n}.nu_tilde"), ks.p_value);
            }
        }
    }
    rep.detail("independence_bins", bins as f64);
    Ok(rep.finish(width * t_steps))
}

/// Reconstruction of a configuration column from its carrier column.
///
/// Each of `n_samples` stationary fields is built as in [`check_burke`]
/// with `width` columns and `t_steps` steps. The column `x^t_width` is then
/// rebuilt from the carrier column `u^t_{width-1}` alone by coupling the
/// extreme points of `mu`. A sample succeeds when the coupling synchronizes
/// and every reconstructed value from then on matches the field (exactly for
/// max-plus maps, to `1e-8` relative otherwise). Passes when at least 99% of
/// samples succeed.
///
/// Rejects `mu = δ_{J/2}` and carrier laws with
/// `ν((-∞, J/2] ∪ [K - J/2, ∞)) = 0` for udKdV, and the mean-log condition
/// on `nu` for `dKdV(α, 0)`.
#[allow(clippy::too_many_arguments)]
pub fn check_ergodicity_reconstruction(
    model: &LocalMap,
    mu: &DistributionSpec,
    nu: &DistributionSpec,
    width: usize,
    t_steps: usize,
    n_samples: usize,
    rng: &RngStream,
    settings: &TestSettings,
) -> Result<TestReport> {
    model.validate()?;
    if kind_of(model)? != LatticeKind::TypeI {
        return Err(Error::UnsupportedFamily(format!("reconstruction needs a type I model, got {}", model.name())));
    }
    if width == 0 || t_steps == 0 || n_samples == 0 {
        return Err(Error::Domain("width, t_steps and n_samples must be positive".into()));
    }
    let m = mu.build()?;
    let v = nu.build()?;
    if let LocalMap::UdKdV { j, k } = *model {
        let (lo, hi) = m.support();
        if lo == hi && lo == 0.5 * j {
            return Err(Error::Domain("mu = delta_{J/2} is excluded".into()));
        }
        let low = v.cdf(0.5 * j);
        let high = if k.is_finite() { 1.0 - v.cdf((k - 0.5 * j) - 1e-12 * (1.0 + k.abs())) } else { 0.0 };
        if low + high <= 0.0 {
            return Err(Error::Domain("nu gives no mass to (-inf, J/2] or [K - J/2, inf)".into()));
        }
    }
    mean_log_condition(model, &v, "nu")?;
    let (lo, hi) = m.support();
    let seeds = (
        if lo.is_finite() && (!model.is_positive() || lo > 0.0) { lo } else { m.quantile(1e-12) },
        if hi.is_finite() { hi } else { m.quantile(1.0 - 1e-12) },
    );
    let tol = default_tol(model);
    let match_tol = if model.is_max_plus() { 0.0 } else { 1e-8 };
    let outcomes: Vec<(bool, f64)> = (0..n_samples)
        .into_par_iter()
        .map(|s| -> Result<(bool, f64)> {
            let r = rng.child(s as u64);
            let f = burke_field(model, LatticeKind::TypeI, &m, None, &v, width, t_steps, &r)?;
            let carriers: Vec<f64> = f.carriers.iter().map(|c| c[width - 1]).collect();
            let truth: Vec<f64> = f.rows.iter().map(|row| row[width - 1]).collect();
            let path = match reconstruct_from_carrier(&carriers, model, seeds, tol) {
                Ok(p) => p,
                Err(Error::NotSynchronized { .. }) => return Ok((false, f64::INFINITY)),
                Err(e) => return Err(e),
            };
            let mut err = 0.0f64;
            for (i, &x) in path.values.iter().enumerate() {
                let t = path.offset as usize + i;
                err = err.max((x - truth[t]).abs() / truth[t].abs().max(1.0));
            }
            Ok((err <= match_tol, path.offset as f64))
        })
        .collect::<Result<_>>()?;
    let ok = outcomes.iter().filter(|o| o.0).count();
    let frac = ok as f64 / n_samples as f64;
    let sync: Vec<f64> = outcomes.iter().filter(|o| o.0).map(|o| o.1).collect();
    let mut rep = ReportBuilder::new(
        format!("ergodicity_reconstruction[{}]", model.name()),
        "configuration column recovered from the carrier column",
        rng.seed(),
        settings.alpha,
    );
    rep.bound("failure_fraction", 1.0 - frac, 0.01)
        .detail("success_fraction", frac)
        .detail("max_sync_time", sync.iter().copied().fold(0.0, f64::max))
        .detail("mean_sync_time", if sync.is_empty() { f64::NAN } else { sync.iter().sum::<f64>() / sync.len() as f64 });
    Ok(rep.finish(n_samples))
}
