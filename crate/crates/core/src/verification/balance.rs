//! Detailed balance of two-point maps and star maps, and carrier fixed points.

use std::collections::BTreeMap;

use super::report::{ReportBuilder, TestReport};
use super::stats::{chi2_independence, marginal_test};
use super::TestSettings;
use crate::distributions::{Distribution, DistributionSpec, PmfTable};
use crate::error::{Error, Result};
use crate::lattice_maps::{three_point_involution, LocalMap};
use crate::rng::RngStream;

/// Exactness threshold for enumerated pushforwards.
pub const EXACT_TV: f64 = 1e-14;

type Joint = BTreeMap<Vec<u64>, f64>;

fn key(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| (x + 0.0).to_bits()).collect()
}

/// Nearest atom when within `1e-9` relative, so rounding in the map does
/// not split an atom in two.
fn snap(x: f64, atoms: &[f64]) -> f64 {
    let i = atoms.partition_point(|&a| a < x);
    let mut best = x;
    let mut gap = 1e-9 * x.abs().max(1.0);
    for &a in atoms[i.saturating_sub(1)..(i + 1).min(atoms.len())].iter() {
        if (a - x).abs() <= gap {
            gap = (a - x).abs();
            best = a;
        }
    }
    best
}

fn atoms(t: &PmfTable) -> Vec<f64> {
    t.points.iter().map(|p| p.0).collect()
}

fn product(tables: &[&PmfTable]) -> Vec<(Vec<f64>, f64)> {
    let mut out = vec![(Vec::new(), 1.0)];
    for t in tables {
        out = out
            .into_iter()
            .flat_map(|(v, p)| {
                t.points.iter().map(move |&(x, q)| {
                    let mut w = v.clone();
                    w.push(x);
                    (w, p * q)
                })
            })
            .collect();
    }
    out
}

fn joint_of(points: impl IntoIterator<Item = (Vec<f64>, f64)>) -> Joint {
    let mut j = Joint::new();
    for (v, p) in points {
        *j.entry(key(&v)).or_insert(0.0) += p;
    }
    j
}

/// Total variation distance between two joint tables.
fn joint_tv(a: &Joint, b: &Joint) -> f64 {
    let mut s = 0.0;
    for (k, p) in a {
        s += (p - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, q) in b {
        if !a.contains_key(k) {
            s += q.abs();
        }
    }
    0.5 * s
}

/// Pushforward of `product(inputs)` under `f`, snapped to `outputs` atoms,
/// compared with `product(outputs)`.
fn exact_pushforward_tv(
    inputs: &[&PmfTable],
    outputs: &[&PmfTable],
    f: impl Fn(&[f64]) -> Result<Vec<f64>>,
) -> Result<f64> {
    let out_atoms: Vec<Vec<f64>> = outputs.iter().map(|t| atoms(t)).collect();
    let mut pushed = Vec::new();
    for (v, p) in product(inputs) {
        let w: Vec<f64> = f(&v)?.iter().zip(&out_atoms).map(|(&x, a)| snap(x, a)).collect();
        pushed.push((w, p));
    }
    Ok(joint_tv(&joint_of(pushed), &joint_of(product(outputs))))
}

fn build(spec: &DistributionSpec) -> Result<Distribution> {
    spec.build()
}

/// Marginal p-value of `sample` against `law`, recorded under `name`.
pub(crate) fn record_marginal(
    b: &mut ReportBuilder,
    name: &str,
    sample: &[f64],
    law: &Distribution,
) -> Result<()> {
    let m = marginal_test(sample, law)?;
    b.detail(format!("{name}.statistic"), m.statistic);
    b.p_value(name, m.p_value);
    Ok(())
}

/// Independence p-value of `pairs`, recorded under `name`.
pub(crate) fn record_independence(
    b: &mut ReportBuilder,
    name: &str,
    pairs: &[(f64, f64)],
    bins: usize,
) -> Result<()> {
    let c = chi2_independence(pairs, bins)?;
    b.detail(format!("{name}.statistic"), c.statistic);
    b.p_value(name, c.p_value);
    Ok(())
}

/// Detailed balance `F(μ × ν) = μ × ν` of a two-point map.
///
/// Finite discrete marginals are enumerated and the total variation between
/// `μ × ν` and its pushforward must not exceed [`EXACT_TV`]. Otherwise `n`
/// pairs are drawn and the images are tested for the marginals `μ`, `ν` and
/// for independence.
pub fn check_detailed_balance(
    map: &LocalMap,
    mu: &DistributionSpec,
    nu: &DistributionSpec,
    n: usize,
    rng: &RngStream,
    settings: &TestSettings,
) -> Result<TestReport> {
    map.validate()?;
    let (m, v) = (build(mu)?, build(nu)?);
    let mut b = ReportBuilder::new(
        format!("detailed_balance[{}]", map.name()),
        "F(mu x nu) = mu x nu",
        rng.seed(),
        settings.alpha,
    );
    if m.is_finite_discrete() && v.is_finite_discrete() {
        let (tm, tv) = (m.exact_pmf_table()?, v.exact_pmf_table()?);
        let tv_dist = exact_pushforward_tv(&[&tm, &tv], &[&tm, &tv], |p| {
            let (x, u) = map.apply2(p[0], p[1])?;
            Ok(vec![x, u])
        })?;
        b.bound("tv", tv_dist, EXACT_TV);
        return Ok(b.finish(tm.len() * tv.len()));
    }
    let xs = m.sample_n(&mut rng.child(0), n);
    let us = v.sample_n(&mut rng.child(1), n);
    let mut pairs = Vec::with_capacity(n);
    for (&x, &u) in xs.iter().zip(&us) {
        pairs.push(map.apply2(x, u)?);
    }
    let (x2, u2): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    record_marginal(&mut b, "ks_x", &x2, &m)?;
    record_marginal(&mut b, "ks_u", &u2, &v)?;
    record_independence(&mut b, "independence", &pairs, settings.bins)?;
    Ok(b.finish(n))
}

/// Star detailed balance `F*(μ × ν) = μ̃ × ν̃`, together with invariance
/// of `μ̃ × μ × ν` under the three-point involution built from `F*`.
#[allow(clippy::too_many_arguments)]
pub fn check_detailed_balance_star(
    star: &LocalMap,
    mu: &DistributionSpec,
    nu: &DistributionSpec,
    mu_t: &DistributionSpec,
    nu_t: &DistributionSpec,
    n: usize,
    rng: &RngStream,
    settings: &TestSettings,
) -> Result<TestReport> {
    let inv = three_point_involution(star)?;
    let (m, v, mt, vt) = (build(mu)?, build(nu)?, build(mu_t)?, build(nu_t)?);
    let mut b = ReportBuilder::new(
        format!("detailed_balance_star[{}]", star.name()),
        "F*(mu x nu) = mu~ x nu~",
        rng.seed(),
        settings.alpha,
    );
    if [&m, &v, &mt, &vt].iter().all(|d| d.is_finite_discrete()) {
        let (tm, tv, tmt, tvt) = (m.exact_pmf_table()?, v.exact_pmf_table()?, mt.exact_pmf_table()?, vt.exact_pmf_table()?);
        let two = exact_pushforward_tv(&[&tm, &tv], &[&tmt, &tvt], |p| {
            let (x, u) = star.apply2(p[0], p[1])?;
            Ok(vec![x, u])
        })?;
        let three = exact_pushforward_tv(&[&tmt, &tm, &tv], &[&tmt, &tm, &tv], |p| {
            let (a, c, d) = inv.apply(p[0], p[1], p[2])?;
            Ok(vec![a, c, d])
        })?;
        b.bound("tv_star", two, EXACT_TV).bound("tv_involution", three, EXACT_TV);
        return Ok(b.finish(tm.len() * tv.len() + tmt.len() * tm.len() * tv.len()));
    }
    let xs = m.sample_n(&mut rng.child(0), n);
    let us = v.sample_n(&mut rng.child(1), n);
    let mut pairs = Vec::with_capacity(n);
    for (&x, &u) in xs.iter().zip(&us) {
        pairs.push(star.apply2(x, u)?);
    }
    let (x2, u2): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    record_marginal(&mut b, "star.ks_x", &x2, &mt)?;
    record_marginal(&mut b, "star.ks_u", &u2, &vt)?;
    record_independence(&mut b, "star.independence", &pairs, settings.bins)?;

    let a_in = mt.sample_n(&mut rng.child(2), n);
    let b_in = m.sample_n(&mut rng.child(3), n);
    let c_in = v.sample_n(&mut rng.child(4), n);
    let (mut o1, mut o2, mut o3) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let (p, q, r) = inv.apply(a_in[i], b_in[i], c_in[i])?;
        o1.push(p);
        o2.push(q);
        o3.push(r);
    }
    record_marginal(&mut b, "involution.ks_1", &o1, &mt)?;
    record_marginal(&mut b, "involution.ks_2", &o2, &m)?;
    record_marginal(&mut b, "involution.ks_3", &o3, &v)?;
    let zip = |a: &[f64], c: &[f64]| a.iter().copied().zip(c.iter().copied()).collect::<Vec<_>>();
    record_independence(&mut b, "involution.independence_12", &zip(&o1, &o2), settings.bins)?;
    record_independence(&mut b, "involution.independence_13", &zip(&o1, &o3), settings.bins)?;
    record_independence(&mut b, "involution.independence_23", &zip(&o2, &o3), settings.bins)?;
    Ok(b.finish(2 * n))
}

/// Stationary carrier law on `{0, 1, ..., truncation - 1}` by power iteration.
///
/// Iterates `ν ↦ law of F⁽²⁾(X, U)` with `X ~ mu`, `U ~ ν` from `ν = δ₀`
/// until the L1 change drops below `1e-15`. Carriers at or past
/// the truncation are held in one overflow cell whose mass is returned as
/// the defect.
pub fn carrier_fixed_point(map: &LocalMap, mu: &PmfTable, truncation: usize) -> Result<(PmfTable, f64)> {
    let size = truncation + 1;
    let mut nu = vec![0.0; size];
    nu[0] = 1.0;
    let mut targets = vec![Vec::with_capacity(mu.len()); size];
    for (k, t) in targets.iter_mut().enumerate() {
        for &(x, p) in &mu.points {
            let u2 = map.apply2(x, k as f64)?.1;
            if u2 < 0.0 || u2.fract() != 0.0 {
                return Err(Error::Domain(format!("carrier {u2} leaves the grid {{0, ..., {truncation}}}")));
            }
            t.push(((u2 as usize).min(truncation), p));
        }
    }
    let mut change = f64::INFINITY;
    for _ in 0..1_000_000 {
        let mut next = vec![0.0; size];
        for (k, t) in targets.iter().enumerate() {
            for &(j, p) in t {
                next[j] += nu[k] * p;
            }
        }
        change = next.iter().zip(&nu).map(|(a, b)| (a - b).abs()).sum();
        nu = next;
        if change < 1e-15 {
            let defect = nu[truncation];
            let points = nu[..truncation].iter().enumerate().map(|(k, &p)| (k as f64, p)).collect();
            return Ok((PmfTable::from_points(points), defect));
        }
    }
    Err(Error::NotConverged { index: truncation as i64, change })
}

/// Carrier law of the box-ball system `udKdV(1, ∞)` with Bernoulli(`p`)
/// occupations, by [`carrier_fixed_point`] with truncation 64.
pub fn bbs_carrier_law(p: f64) -> Result<(PmfTable, f64)> {
    if !(0.0..0.5).contains(&p) {
        return Err(Error::params("Bernoulli", "carrier is positive recurrent only for 0 <= p < 1/2"));
    }
    let mu = PmfTable::from_points(vec![(0.0, 1.0 - p), (1.0, p)]);
    carrier_fixed_point(&LocalMap::UdKdV { j: 1.0, k: f64::INFINITY }, &mu, 64)
}
