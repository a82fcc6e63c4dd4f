//! Carriers on finite windows and the induced time evolution.
//!
//! The configuration at the next time step is obtained by threading a
//! carrier from left to right through the local map. On a finite window the
//! carrier entering from the left is unknown; [`solve_carrier_coupled`]
//! runs two extreme seeds until they agree, after which the carrier no longer
//! depends on anything left of the window. Since every carrier recursion used
//! here is monotone in the incoming carrier, agreement of the extreme seeds
//! implies agreement of every seed between them.
//!
//! Type I models (udKdV, dKdV, K maps) thread `u_n = F⁽²⁾(x_n, u_{n-1})`.
//! Type II models (udToda, dToda) thread `U_{n+1} = F⁽³⁾(Q_{n+1}, E_n, U_n)`
//! and emit `(Q'_n, E'_n) = (F⁽¹⁾, F⁽²⁾)(Q_{n+1}, E_n, U_n)`.

mod window;

pub use window::LatticeWindow;

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::lattice_maps::{LatticeKind, LocalMap};

/// Carrier values aligned to a window.
///
/// `values[i]` is `u_{offset + i}`. For type II models `U_n` is the carrier
/// entering pair `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarrierPath {
    pub offset: i64,
    pub values: Vec<f64>,
    pub sync_index: Option<i64>,
    pub residual: f64,
}

impl CarrierPath {
    /// One past the last index.
    pub fn end(&self) -> i64 {
        self.offset + self.values.len() as i64
    }

    /// `u_n`, if covered.
    #[inline]
    pub fn get(&self, n: i64) -> Option<f64> {
        if n < self.offset || n >= self.end() {
            None
        } else {
            Some(self.values[(n - self.offset) as usize])
        }
    }
}

/// Default tolerance: exact for max-plus maps, `1e-10` otherwise.
pub fn default_tol(model: &LocalMap) -> f64 {
    if model.is_max_plus() {
        0.0
    } else {
        1e-10
    }
}

/// Default coupling seeds.
///
/// With a carrier law `nu`: its lower support bound (or `1e-12` quantile)
/// and its `1 - 1e-12` quantile. Otherwise `(0, 1)` for max-plus maps and
/// `(1e-9, 1e9)` for maps on `(0, ∞)`.
pub fn default_seeds(model: &LocalMap, nu: Option<&Distribution>) -> (f64, f64) {
    match nu {
        Some(d) => {
            let (lo, hi) = d.support();
            let a = if lo.is_finite() && (!model.is_positive() || lo > 0.0) { lo } else { d.quantile(1e-12) };
            let b = if hi.is_finite() { hi } else { d.quantile(1.0 - 1e-12) };
            (a, b)
        }
        None if model.is_positive() => (1e-9, 1e9),
        None => (0.0, 1.0),
    }
}

fn check_supported(model: &LocalMap) -> Result<()> {
    if let LocalMap::DKdV { alpha, beta } = *model {
        if alpha > 0.0 && beta > 0.0 && alpha != beta {
            return Err(Error::UnsupportedRegime(
                "no bi-infinite carrier solver for dKdV with alpha, beta > 0 and alpha != beta".into(),
            ));
        }
    }
    Ok(())
}

/// One carrier step at index `n` from the incoming carrier `u`.
#[inline]
fn carrier_step(w: &LatticeWindow, n: i64, u: f64) -> Result<f64> {
    match w.kind {
        LatticeKind::TypeI => Ok(w.model.apply2(w.x(n), u)?.1),
        LatticeKind::TypeII => {
            let (_, e) = w.pair(n);
            let (q_next, _) = w.pair(n + 1);
            Ok(w.model.apply3(q_next, e, u)?.2)
        }
    }
}

/// Range of indices `n` at which [`carrier_step`] may be applied.
fn step_range(w: &LatticeWindow) -> (i64, i64) {
    match w.kind {
        LatticeKind::TypeI => (w.offset, w.end()),
        LatticeKind::TypeII => (w.offset, w.end() - 1),
    }
}

/// Carrier by coupling two seeds from the left edge.
///
/// Type I: seeds are values of `u_{offset-1}`; type II: values of `U_offset`.
/// The returned path starts at the synchronization index and covers the
/// rest of the window.
pub fn solve_carrier_coupled(window: &LatticeWindow, seeds: (f64, f64), tol: f64) -> Result<CarrierPath> {
    check_supported(&window.model)?;
    if window.len() < 2 {
        return Err(Error::Coverage("window must hold at least two sites".into()));
    }
    let (lo, hi) = step_range(window);
    let (mut a, mut b) = seeds;
    let mut sync = None;
    let mut gap = 0.0f64;
    let mut values = Vec::new();
    let start = match window.kind {
        LatticeKind::TypeI => lo,
        LatticeKind::TypeII => {
            if (a - b).abs() <= tol {
                sync = Some(lo);
                gap = (a - b).abs();
                values.push(a);
            }
            lo
        }
    };
    let index_of_output = |n: i64| match window.kind {
        LatticeKind::TypeI => n,
        LatticeKind::TypeII => n + 1,
    };
    for n in start..hi {
        if sync.is_none() {
            a = carrier_step(window, n, a)?;
            b = carrier_step(window, n, b)?;
            if (a - b).abs() <= tol {
                sync = Some(index_of_output(n));
                gap = (a - b).abs();
                values.push(a);
            }
        } else {
            a = carrier_step(window, n, a)?;
            values.push(a);
        }
    }
    let Some(s) = sync else {
        return Err(Error::NotSynchronized { failed: 1, total: 1 });
    };
    let path = CarrierPath { offset: s, values, sync_index: Some(s), residual: gap };
    let r = carrier_residual(window, &path)?;
    Ok(CarrierPath { residual: gap.max(r), ..path })
}

/// Carrier with a known incoming value (`u_{offset-1}` for type I,
/// `U_offset` for type II).
pub fn solve_carrier_with_boundary(window: &LatticeWindow, u_left: f64) -> Result<CarrierPath> {
    let (lo, hi) = step_range(window);
    let mut u = u_left;
    let mut values = Vec::with_capacity(window.len());
    if window.kind == LatticeKind::TypeII {
        values.push(u);
    }
    for n in lo..hi {
        u = carrier_step(window, n, u)?;
        values.push(u);
    }
    let path = CarrierPath { offset: window.offset, values, sync_index: None, residual: 0.0 };
    let r = carrier_residual(window, &path)?;
    Ok(CarrierPath { residual: r, ..path })
}

/// Largest `|F⁽²⁾(x_n, u_{n-1}) - u_n|` (type I) or
/// `|F⁽³⁾(Q_{n+1}, E_n, U_n) - U_{n+1}|` (type II) along the path.
pub fn carrier_residual(window: &LatticeWindow, path: &CarrierPath) -> Result<f64> {
    let mut r = 0.0f64;
    let (_, hi) = step_range(window);
    for n in path.offset..path.end() - 1 {
        let step_at = match window.kind {
            LatticeKind::TypeI => n + 1,
            LatticeKind::TypeII => n,
        };
        if step_at < window.offset || step_at >= hi {
            continue;
        }
        let next = carrier_step(window, step_at, path.values[(n - path.offset) as usize])?;
        r = r.max((next - path.values[(n + 1 - path.offset) as usize]).abs());
    }
    Ok(r)
}

/// Carrier of dKdV(0, β) from the truncated continued fraction
/// `u_n = x_n / (1 + β x_n u_{n-1})`.
///
/// Each `u_n` is evaluated from `depth` terms and from `depth + 8` terms;
/// indices closer than `depth + 8` to the left edge are not emitted.
pub fn solve_carrier_contfrac(window: &LatticeWindow, depth: usize, tol: f64) -> Result<CarrierPath> {
    let beta = match window.model {
        LocalMap::DKdV { alpha, beta } if alpha == 0.0 && beta > 0.0 => beta,
        m => {
            return Err(Error::UnsupportedRegime(format!(
                "continued fraction carrier needs dKdV with alpha = 0 < beta, got {m:?}"
            )))
        }
    };
    if depth < 2 {
        return Err(Error::Domain("depth must be at least 2".into()));
    }
    let deep = depth + 8;
    if window.len() <= deep {
        return Err(Error::Coverage(format!("window of {} sites is shorter than depth {deep}", window.len())));
    }
    let cf = |n: i64, d: usize| {
        let mut u = 0.0;
        for k in (n + 1 - d as i64)..=n {
            let x = window.x(k);
            u = x / (1.0 + beta * x * u);
        }
        u
    };
    let first = window.offset + deep as i64 - 1;
    let mut values = Vec::with_capacity(window.len() - deep + 1);
    for n in first..window.end() {
        let a = cf(n, depth);
        let b = cf(n, deep);
        if (a - b).abs() > tol {
            return Err(Error::NotConverged { index: n, change: (a - b).abs() });
        }
        values.push(b);
    }
    let path = CarrierPath { offset: first, values, sync_index: None, residual: 0.0 };
    let r = carrier_residual(window, &path)?;
    Ok(CarrierPath { residual: r, ..path })
}

/// Closed-form udToda carrier:
/// `U_k = Q_k + max{0, θ_{k-1}, θ_{k-1} + θ_{k-2}, ...}` with
/// `θ_i = Q_i - E_i`, the sums truncated at the window's left edge.
///
/// Evaluated with prefix sums `P_k = Σ_{offset ≤ i < k} θ_i` as
/// `U_k = Q_k + P_k - min_{offset ≤ j ≤ k} P_j`.
pub fn solve_carrier_udtoda(window: &LatticeWindow) -> Result<CarrierPath> {
    if window.model != LocalMap::UdToda {
        return Err(Error::UnsupportedFamily(format!("closed form needs udToda, got {}", window.model.name())));
    }
    let mut values = Vec::with_capacity(window.len());
    let mut p = 0.0f64;
    let mut pmin = 0.0f64;
    for k in window.offset..window.end() {
        let (q, e) = window.pair(k);
        values.push(q + (p - pmin));
        p += q - e;
        pmin = pmin.min(p);
    }
    let path = CarrierPath { offset: window.offset, values, sync_index: Some(window.offset), residual: 0.0 };
    let r = carrier_residual(window, &path)?;
    Ok(CarrierPath { residual: r, ..path })
}

/// One time step on the range covered by `carrier`.
///
/// Type I emits `x'_n = F⁽¹⁾(x_n, u_{n-1})` for every `n` with `u_{n-1}`
/// covered. Type II emits `(Q'_n, E'_n)` for every covered `U_n` whose
/// right neighbour `Q_{n+1}` lies in the window.
pub fn evolve_one_step(window: &LatticeWindow, carrier: &CarrierPath) -> Result<LatticeWindow> {
    let (from, to) = match window.kind {
        LatticeKind::TypeI => (carrier.offset + 1, window.end().min(carrier.end() + 1)),
        LatticeKind::TypeII => (carrier.offset, (window.end() - 1).min(carrier.end())),
    };
    if from < window.offset || from >= to {
        return Err(Error::Coverage(format!(
            "carrier [{}, {}) does not cover an output range of window [{}, {})",
            carrier.offset,
            carrier.end(),
            window.offset,
            window.end()
        )));
    }
    let mut values = Vec::with_capacity(2 * (to - from) as usize);
    for n in from..to {
        match window.kind {
            LatticeKind::TypeI => {
                let u = carrier.values[(n - 1 - carrier.offset) as usize];
                values.push(window.model.apply2(window.x(n), u)?.0);
            }
            LatticeKind::TypeII => {
                let u = carrier.values[(n - carrier.offset) as usize];
                let (_, e) = window.pair(n);
                let (q_next, _) = window.pair(n + 1);
                let (q2, e2, _) = window.model.apply3(q_next, e, u)?;
                values.push(q2);
                values.push(e2);
            }
        }
    }
    Ok(LatticeWindow { offset: from, kind: window.kind, values, model: window.model })
}

/// Rows `x^0, ..., x^t` and the carriers `u^0, ..., u^{t-1}` threading them.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    pub model: LocalMap,
    pub rows: Vec<LatticeWindow>,
    pub carriers: Vec<CarrierPath>,
}

impl SpaceTimeField {
    /// Largest violation of the local relation over all cells.
    ///
    /// Type I: `F(x^t_n, u^t_{n-1}) = (x^{t+1}_n, u^t_n)`.
    /// Type II: `F(Q^t_{n+1}, E^t_n, U^t_n) = (Q^{t+1}_n, E^{t+1}_n, U^t_{n+1})`.
    pub fn local_residual(&self) -> Result<f64> {
        let mut r = 0.0f64;
        for (t, c) in self.carriers.iter().enumerate() {
            let (row, next) = (&self.rows[t], &self.rows[t + 1]);
            for n in next.offset..next.end() {
                match row.kind {
                    LatticeKind::TypeI => {
                        let (Some(u_in), Some(u_out)) = (c.get(n - 1), c.get(n)) else { continue };
                        let (a, b) = self.model.apply2(row.x(n), u_in)?;
                        r = r.max((a - next.x(n)).abs()).max((b - u_out).abs());
                    }
                    LatticeKind::TypeII => {
                        let (Some(u_in), Some(u_out)) = (c.get(n), c.get(n + 1)) else { continue };
                        let (_, e) = row.pair(n);
                        let (q1, _) = row.pair(n + 1);
                        let (a, b, d) = self.model.apply3(q1, e, u_in)?;
                        let (q2, e2) = next.pair(n);
                        r = r.max((a - q2).abs()).max((b - e2).abs()).max((d - u_out).abs());
                    }
                }
            }
        }
        Ok(r)
    }

    /// CSV with columns `t,n,x,u`; `u` is empty where no carrier is known.
    ///
    /// Type II rows use scalar slots: `Q_n` at `2n - 1` carrying `U_n`, and
    /// `E_n` at `2n` carrying the intermediate carrier `F*⁽²⁾(E_n, U_n)`.
    pub fn to_csv(&self) -> Result<String> {
        let mut s = String::from("t,n,x,u\n");
        let star = self.model.star();
        for (t, row) in self.rows.iter().enumerate() {
            let c = self.carriers.get(t);
            for n in row.offset..row.end() {
                match row.kind {
                    LatticeKind::TypeI => {
                        let u = c.and_then(|c| c.get(n)).map(|u| u.to_string()).unwrap_or_default();
                        let _ = writeln!(s, "{t},{n},{},{u}", row.x(n));
                    }
                    LatticeKind::TypeII => {
                        let (q, e) = row.pair(n);
                        let u = c.and_then(|c| c.get(n));
                        let mid = match (u, star) {
                            (Some(u), Some(st)) => Some(st.apply2(e, u)?.1),
                            _ => None,
                        };
                        let f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                        let _ = writeln!(s, "{t},{},{q},{}", 2 * n - 1, f(u));
                        let _ = writeln!(s, "{t},{},{e},{}", 2 * n, f(mid));
                    }
                }
            }
        }
        Ok(s)
    }
}

/// Evolve `t_steps` steps, coupling default seeds at every step.
///
/// Each step must synchronize within `margin` sites of the row's left
/// edge, otherwise [`Error::NotSynchronized`] is returned. Rows shrink from
/// the left by the synchronization distance plus one site (type I) or from
/// the right by one pair (type II).
pub fn evolve_multi(window: &LatticeWindow, t_steps: usize, margin: usize) -> Result<SpaceTimeField> {
    evolve_multi_with(window, t_steps, margin, default_seeds(&window.model, None), default_tol(&window.model))
}

/// [`evolve_multi`] with explicit seeds and tolerance.
pub fn evolve_multi_with(
    window: &LatticeWindow,
    t_steps: usize,
    margin: usize,
    seeds: (f64, f64),
    tol: f64,
) -> Result<SpaceTimeField> {
    let mut rows = vec![window.clone()];
    let mut carriers = Vec::with_capacity(t_steps);
    for _ in 0..t_steps {
        let row = rows.last().unwrap();
        let c = solve_carrier_coupled(row, seeds, tol)?;
        if c.sync_index.unwrap() - row.offset > margin as i64 {
            return Err(Error::NotSynchronized { failed: 1, total: 1 });
        }
        let next = evolve_one_step(row, &c)?;
        carriers.push(c);
        rows.push(next);
    }
    Ok(SpaceTimeField { model: window.model, rows, carriers })
}

/// Recover a configuration column `(x^t_1)_t` from the carrier column
/// `(u^t_0)_t` of a type I model.
///
/// Couples two seeds for `x^0_1` through `x^{t+1} = F⁽¹⁾(x^t, u^t_0)`. The
/// returned path has `values[i] = x^{offset + i}` from the synchronization
/// time on; its residual re-checks each cell by applying the involution to
/// `(x^{t+1}, u^t_1)`.
pub fn reconstruct_from_carrier(
    carrier_column: &[f64],
    model: &LocalMap,
    seeds: (f64, f64),
    tol: f64,
) -> Result<CarrierPath> {
    if model.lattice_kind() != Some(LatticeKind::TypeI) {
        return Err(Error::UnsupportedFamily(format!("reconstruction needs a type I model, got {}", model.name())));
    }
    check_supported(model)?;
    let (mut a, mut b) = seeds;
    let mut sync = None;
    let mut gap = 0.0f64;
    let mut values = Vec::new();
    if (a - b).abs() <= tol {
        sync = Some(0);
        values.push(a);
    }
    let mut residual = 0.0f64;
    for (t, &u) in carrier_column.iter().enumerate() {
        if sync.is_none() {
            a = model.apply2(a, u)?.0;
            b = model.apply2(b, u)?.0;
            if (a - b).abs() <= tol {
                sync = Some(t as i64 + 1);
                gap = (a - b).abs();
                values.push(a);
            }
        } else {
            let (x_next, u_out) = model.apply2(a, u)?;
            let (x_back, u_back) = model.apply2(x_next, u_out)?;
            residual = residual.max((x_back - a).abs()).max((u_back - u).abs());
            a = x_next;
            values.push(a);
        }
    }
    let Some(s) = sync else {
        return Err(Error::NotSynchronized { failed: 1, total: 1 });
    };
    Ok(CarrierPath { offset: s, values, sync_index: Some(s), residual: residual.max(gap) })
}
