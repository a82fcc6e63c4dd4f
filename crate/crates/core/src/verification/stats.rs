//! Goodness-of-fit and independence statistics.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::distributions::{Distribution, PmfTable};
use crate::error::{Error, Result};

/// Statistic with its p-value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestStat {
    pub statistic: f64,
    pub p_value: f64,
}

/// Pearson chi-square statistic with degrees of freedom and p-value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chi2Stat {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Survival function of the Kolmogorov distribution, `P(K > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.18 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let mut s = 0.0;
        for k in 1..=20 {
            let m = (2 * k - 1) as f64;
            s += (-m * m * pi2 / (8.0 * x * x)).exp();
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let t = (-2.0 * kf * kf * x * x).exp();
            s += if k % 2 == 1 { t } else { -t };
            if t < 1e-300 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// Asymptotic KS p-value for distance `d` at effective size `n`.
pub fn ks_p_value(d: f64, n: f64) -> f64 {
    let s = n.sqrt();
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

fn sorted(sample: &[f64]) -> Vec<f64> {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// One-sample KS distance and p-value against a continuous CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<TestStat> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let v = sorted(sample);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(TestStat { statistic: d, p_value: ks_p_value(d, n) })
}

/// KS distance between an empirical sample and a discrete law, evaluated at
/// the points of its support table (both one-sided limits).
pub fn ks_discrete(sample: &[f64], table: &PmfTable) -> Result<TestStat> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let v = sorted(sample);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    let mut f = 0.0;
    let mut idx = 0usize;
    for &(x, p) in &table.points {
        let below = v[idx..].partition_point(|&s| s < x - 1e-9 * (1.0 + x.abs())) + idx;
        d = d.max((below as f64 / n - f).abs());
        let upto = v[below..].partition_point(|&s| s <= x + 1e-9 * (1.0 + x.abs())) + below;
        f += p;
        d = d.max((upto as f64 / n - f).abs());
        idx = upto;
    }
    Ok(TestStat { statistic: d, p_value: ks_p_value(d, n) })
}

/// Two-sample KS statistic `sup |F_a - F_b|` with asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestStat> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let a = sorted(a);
    let b = sorted(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(TestStat { statistic: d, p_value: ks_p_value(d, na * nb / (na + nb)) })
}

/// Upper tail of the chi-square law.
pub fn chi2_sf(x: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    if x <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df as f64).map(|c| c.sf(x)).unwrap_or(f64::NAN)
}

/// Chi-square goodness of fit of a discrete sample against a pmf table.
///
/// Cells are merged left to right until each expected count is at least 5;
/// mass outside the table joins the last cell.
pub fn chi2_gof(sample: &[f64], table: &PmfTable) -> Result<Chi2Stat> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = sample.len() as f64;
    let v = sorted(sample);
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    let mut idx = 0usize;
    for (k, &(x, p)) in table.points.iter().enumerate() {
        let upto = v[idx..].partition_point(|&s| s <= x + 1e-9 * (1.0 + x.abs())) + idx;
        obs += (upto - idx) as f64;
        exp += n * p;
        idx = upto;
        if exp >= 5.0 && k + 1 < table.points.len() {
            cells.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    obs += (v.len() - idx) as f64;
    exp += n * (1.0 - table.total()).max(0.0);
    if exp < 5.0 && !cells.is_empty() {
        let last = cells.pop().unwrap();
        obs += last.0;
        exp += last.1;
    }
    cells.push((obs, exp));
    let stat: f64 = cells.iter().map(|(o, e)| if *e > 0.0 { (o - e) * (o - e) / e } else if *o > 0.0 { f64::INFINITY } else { 0.0 }).sum();
    let df = cells.len().saturating_sub(1);
    Ok(Chi2Stat { statistic: stat, df, p_value: if stat.is_infinite() { 0.0 } else { chi2_sf(stat, df) } })
}

/// Pearson chi-square independence test on a quantile-binned table.
///
/// Needs at least `25 · bins²` pairs. Edges are the sample quantiles of each
/// coordinate with duplicates removed, so discrete coordinates use fewer bins.
pub fn chi2_independence(pairs: &[(f64, f64)], bins: usize) -> Result<Chi2Stat> {
    let needed = 25 * bins * bins;
    if pairs.len() < needed.max(1) {
        return Err(Error::TooFewSamples { needed: needed.max(1), got: pairs.len() });
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let ex = quantile_edges(&xs, bins);
    let ey = quantile_edges(&ys, bins);
    let (r, c) = (ex.len() + 1, ey.len() + 1);
    let mut table = vec![0.0; r * c];
    for &(x, y) in pairs {
        let i = ex.partition_point(|&e| e < x);
        let j = ey.partition_point(|&e| e < y);
        table[i * c + j] += 1.0;
    }
    let rows: Vec<f64> = (0..r).map(|i| (0..c).map(|j| table[i * c + j]).sum()).collect();
    let cols: Vec<f64> = (0..c).map(|j| (0..r).map(|i| table[i * c + j]).sum()).collect();
    let n = pairs.len() as f64;
    let mut stat = 0.0;
    for i in 0..r {
        if rows[i] == 0.0 {
            continue;
        }
        for j in 0..c {
            if cols[j] == 0.0 {
                continue;
            }
            let e = rows[i] * cols[j] / n;
            let o = table[i * c + j];
            stat += (o - e) * (o - e) / e;
        }
    }
    let nr = rows.iter().filter(|&&v| v > 0.0).count();
    let nc = cols.iter().filter(|&&v| v > 0.0).count();
    let df = nr.saturating_sub(1) * nc.saturating_sub(1);
    Ok(Chi2Stat { statistic: if df == 0 { 0.0 } else { stat }, df, p_value: chi2_sf(stat, df) })
}

fn quantile_edges(v: &[f64], bins: usize) -> Vec<f64> {
    let s = sorted(v);
    let mut e: Vec<f64> = (1..bins).map(|k| s[(k * s.len()) / bins]).collect();
    e.dedup();
    // An edge at the sample maximum would leave the top bin empty.
    if e.last() == s.last() {
        e.pop();
    }
    e
}

/// Total variation distance `½ Σ |p - q|` over the union of supports.
pub fn tv_distance_exact(p: &PmfTable, q: &PmfTable) -> f64 {
    let (mut i, mut j) = (0usize, 0usize);
    let mut s = 0.0;
    let (a, b) = (&p.points, &q.points);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
            s += a[i].1.abs();
            i += 1;
        } else if i >= a.len() || b[j].0 < a[i].0 {
            s += b[j].1.abs();
            j += 1;
        } else {
            s += (a[i].1 - b[j].1).abs();
            i += 1;
            j += 1;
        }
    }
    0.5 * s
}

/// Sample autocorrelation at `lag`.
pub fn autocorrelation(series: &[f64], lag: usize) -> f64 {
    let n = series.len();
    if lag >= n {
        return 0.0;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var: f64 = series.iter().map(|x| (x - mean) * (x - mean)).sum();
    if var == 0.0 {
        return 0.0;
    }
    let cov: f64 = (0..n - lag).map(|t| (series[t] - mean) * (series[t + lag] - mean)).sum();
    cov / var
}

/// Marginal test of a sample against a law.
///
/// Continuous laws use one-sample KS. Discrete laws use chi-square goodness
/// of fit on the (truncated) pmf table. A point mass passes only when every
/// draw equals the atom.
pub fn marginal_test(sample: &[f64], law: &Distribution) -> Result<MarginalStat> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let (lo, hi) = law.support();
    if lo == hi {
        let bad = sample.iter().filter(|&&x| x != lo).count();
        let frac = bad as f64 / sample.len() as f64;
        return Ok(MarginalStat { kind: MarginalKind::Exact, statistic: frac, p_value: if bad == 0 { 1.0 } else { 0.0 } });
    }
    if law.is_discrete() {
        let t = law.pmf_table(1e-12);
        let c = chi2_gof(sample, &t)?;
        Ok(MarginalStat { kind: MarginalKind::Chi2, statistic: c.statistic, p_value: c.p_value })
    } else {
        let k = ks_one_sample(sample, |x| law.cdf(x))?;
        Ok(MarginalStat { kind: MarginalKind::Ks, statistic: k.statistic, p_value: k.p_value })
    }
}

/// Which test [`marginal_test`] applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarginalKind {
    Ks,
    Chi2,
    Exact,
}

/// Result of [`marginal_test`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarginalStat {
    pub kind: MarginalKind,
    pub statistic: f64,
    pub p_value: f64,
}
