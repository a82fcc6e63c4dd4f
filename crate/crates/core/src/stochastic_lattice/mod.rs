//! Stochastic quadrant models driven by boundary data.
//!
//! Every model fills the quadrant `n, m ≥ 1` with one recursion
//!
//! ```text
//! (U_{n,m}, V_{n,m}) = R(X_{n,m}, U_{n,m-1}, V_{n-1,m})
//! ```
//!
//! where `X` is i.i.d. bulk noise, `U_{n,0}` is the bottom boundary and
//! `V_{0,m}` the left boundary. For last passage percolation and the
//! polymers, `U` and `V` are the horizontal and vertical increments of the
//! partition function; for the vertex model, `U` is the occupation of a
//! vertical line and `V` the number of particles leaving to the right. Type I
//! lattice maps can be used as deterministic kernels that ignore `X`; the
//! Toda maps act through their last two outputs.

mod bruteforce;

pub use bruteforce::{
    dlpp_bruteforce, dlpp_recursion, polymer_bruteforce, polymer_recursion, PolymerMode, BRUTEFORCE_MAX,
};

use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::distributions::{log_sum_exp, Distribution, DistributionSpec};
use crate::error::{Error, Result};
use crate::lattice_maps::{LatticeKind, LocalMap, MapSpec};
use crate::rng::RngStream;

/// Filled quadrant. Interior arrays are row-major in `n`:
/// entry `(n - 1) * m_max + (m - 1)` holds site `(n, m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadrantField {
    pub n_max: usize,
    pub m_max: usize,
    /// Bulk noise `X_{n,m}`.
    pub x: Vec<f64>,
    /// First kernel output `U_{n,m}`.
    pub u: Vec<f64>,
    /// Second kernel output `V_{n,m}`.
    pub v: Vec<f64>,
    /// Bottom boundary `U_{n,0}`, `n = 1..=n_max`.
    pub u_bottom: Vec<f64>,
    /// Left boundary `V_{0,m}`, `m = 1..=m_max`.
    pub v_left: Vec<f64>,
    /// Partition function on `0..=n_max × 0..=m_max` (log scale for
    /// polymers), row-major with stride `m_max + 1`.
    pub z: Option<Vec<f64>>,
    /// One kernel, or one per site in interior order.
    pub kernels: Vec<LocalMap>,
    /// Boundary laws `(U_{n,0}, V_{0,m})` when homogeneous.
    pub boundary: Option<(DistributionSpec, DistributionSpec)>,
}

/// Kernel evaluation shared by every quadrant model.
#[inline]
pub fn cell_update(map: &LocalMap, tilde: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    match map {
        LocalMap::RDlpp | LocalMap::RRps | LocalMap::RRpe { .. } | LocalMap::RHsv { .. } => {
            map.quadrant_kernel(tilde, a, b)
        }
        LocalMap::UdToda | LocalMap::DToda => {
            let (_, y, z) = map.apply3(tilde, a, b)?;
            Ok((y, z))
        }
        m if m.lattice_kind() == Some(LatticeKind::TypeI) => m.apply2(a, b),
        m => Err(Error::UnsupportedFamily(format!("{} cannot drive a quadrant", m.name()))),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Space {
    Real,
    Positive,
    Occupation,
    Spin,
    Unit,
    Any,
}

fn spaces(map: &LocalMap) -> (Space, Space, Space) {
    match map {
        LocalMap::RDlpp | LocalMap::UdToda => (Space::Real, Space::Real, Space::Real),
        LocalMap::RRps | LocalMap::RRpe { .. } | LocalMap::DToda => {
            (Space::Positive, Space::Positive, Space::Positive)
        }
        LocalMap::RHsv { .. } => (Space::Unit, Space::Occupation, Space::Spin),
        m if m.is_positive() => (Space::Any, Space::Positive, Space::Positive),
        _ => (Space::Any, Space::Real, Space::Real),
    }
}

fn check_law(law: &Distribution, space: Space, role: &str, map: &LocalMap) -> Result<()> {
    let (lo, hi) = law.support();
    let ok = match space {
        Space::Real | Space::Any => true,
        Space::Positive => lo >= 0.0,
        Space::Occupation => law.is_discrete() && lo >= 0.0,
        Space::Spin => law.is_discrete() && lo >= 0.0 && hi <= 1.0,
        Space::Unit => lo >= 0.0 && hi <= 1.0,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{} law {} is incompatible with the state space of {}",
            role,
            law.spec().family.name(),
            map.name()
        )))
    }
}

impl QuadrantField {
    #[inline]
    fn idx(&self, n: usize, m: usize) -> usize {
        (n - 1) * self.m_max + (m - 1)
    }

    /// Kernel at site `(n, m)`.
    pub fn kernel(&self, n: usize, m: usize) -> LocalMap {
        if self.kernels.len() == 1 {
            self.kernels[0]
        } else {
            self.kernels[self.idx(n, m)]
        }
    }

    /// `X_{n,m}` for `n, m ≥ 1`.
    pub fn x_at(&self, n: usize, m: usize) -> f64 {
        self.x[self.idx(n, m)]
    }

    /// `U_{n,m}` for `n ≥ 1`, `m ≥ 0`.
    pub fn u_at(&self, n: usize, m: usize) -> f64 {
        if m == 0 {
            self.u_bottom[n - 1]
        } else {
            self.u[self.idx(n, m)]
        }
    }

    /// `V_{n,m}` for `n ≥ 0`, `m ≥ 1`.
    pub fn v_at(&self, n: usize, m: usize) -> f64 {
        if n == 0 {
            self.v_left[m - 1]
        } else {
            self.v[self.idx(n, m)]
        }
    }

    /// Partition function at `(n, m)` with `0 ≤ n ≤ n_max`, `0 ≤ m ≤ m_max`.
    pub fn z_at(&self, n: usize, m: usize) -> Option<f64> {
        self.z.as_ref().map(|z| z[n * (self.m_max + 1) + m])
    }

    /// Fill the quadrant from explicit bulk and boundary values.
    ///
    /// `kernels` holds one map or one per site in interior order.
    pub fn fill(
        kernels: Vec<LocalMap>,
        x: Vec<f64>,
        u_bottom: Vec<f64>,
        v_left: Vec<f64>,
    ) -> Result<Self> {
        let (n_max, m_max) = (u_bottom.len(), v_left.len());
        if n_max == 0 || m_max == 0 {
            return Err(Error::Domain("quadrant dimensions must be at least 1".into()));
        }
        if x.len() != n_max * m_max {
            return Err(Error::Domain(format!("bulk has {} values, expected {}", x.len(), n_max * m_max)));
        }
        if kernels.len() != 1 && kernels.len() != n_max * m_max {
            return Err(Error::Domain("kernels must hold one map or one per site".into()));
        }
        for k in &kernels {
            k.validate()?;
        }
        let mut f = QuadrantField {
            n_max,
            m_max,
            u: vec![0.0; x.len()],
            v: vec![0.0; x.len()],
            x,
            u_bottom,
            v_left,
            z: None,
            kernels,
            boundary: None,
        };
        for n in 1..=n_max {
            for m in 1..=m_max {
                let i = f.idx(n, m);
                let (a, b) = (f.u_at(n, m - 1), f.v_at(n - 1, m));
                let (u, v) = cell_update(&f.kernel(n, m), f.x[i], a, b)?;
                f.u[i] = u;
                f.v[i] = v;
            }
        }
        f.z = f.partition();
        Ok(f)
    }

    /// Partition function rebuilt from the bulk and the boundary.
    fn partition(&self) -> Option<Vec<f64>> {
        let k = self.kernels[0];
        if self.kernels.iter().any(|m| *m != k) {
            return None;
        }
        let stride = self.m_max + 1;
        let mut z = vec![0.0; (self.n_max + 1) * stride];
        let inc: fn(f64) -> f64 = match k {
            LocalMap::RDlpp | LocalMap::UdToda => |u| u,
            LocalMap::RRps | LocalMap::DToda => |u| -u.ln(),
            LocalMap::RRpe { .. } => |u| u.ln(),
            _ => return None,
        };
        for n in 1..=self.n_max {
            z[n * stride] = z[(n - 1) * stride] + inc(self.u_bottom[n - 1]);
        }
        for m in 1..=self.m_max {
            z[m] = z[m - 1] + inc(self.v_left[m - 1]);
        }
        for n in 1..=self.n_max {
            for m in 1..=self.m_max {
                let x = self.x_at(n, m);
                let (left, below) = (z[(n - 1) * stride + m], z[n * stride + m - 1]);
                z[n * stride + m] = z_step(&k, x, left, below);
            }
        }
        Some(z)
    }

    /// Largest violation of the defining recursions over all sites.
    ///
    /// Every site's kernel is re-evaluated from the stored inputs and, when a
    /// partition function is present, so is its recursion. Errors are
    /// relative to `max(1, |value|)`, hence exactly zero for max-plus and
    /// vertex fields. Vertex fields also check `U + V = U_in + V_in` and
    /// `V ∈ {0, 1}`.
    pub fn recursion_residual(&self) -> Result<f64> {
        let mut r = 0.0f64;
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);
        let stride = self.m_max + 1;
        for n in 1..=self.n_max {
            for m in 1..=self.m_max {
                let (u, v) = (self.u_at(n, m), self.v_at(n, m));
                let (a, b) = (self.u_at(n, m - 1), self.v_at(n - 1, m));
                let km = self.kernel(n, m);
                let (uu, vv) = cell_update(&km, self.x_at(n, m), a, b)?;
                r = r.max(rel(u, uu)).max(rel(v, vv));
                if let LocalMap::RHsv { .. } = km {
                    r = r.max((u + v - a - b).abs());
                    if v != 0.0 && v != 1.0 {
                        r = r.max(1.0);
                    }
                }
                if let Some(z) = &self.z {
                    let (left, below) = (z[(n - 1) * stride + m], z[n * stride + m - 1]);
                    r = r.max(rel(z[n * stride + m], z_step(&km, self.x_at(n, m), left, below)));
                }
            }
        }
        Ok(r)
    }

    /// Sites `(n, m)` with `n + m = s`, ordered by increasing `n`.
    pub fn anti_diagonal(&self, s: usize) -> Vec<(usize, usize)> {
        (1..=self.n_max)
            .filter_map(|n| {
                let m = s.checked_sub(n)?;
                (1..=self.m_max).contains(&m).then_some((n, m))
            })
            .collect()
    }

    /// CSV with columns `n,m,X,U,V,Z`, boundary sites included with empty
    /// entries where a value is undefined.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,m,X,U,V,Z\n");
        let zs = |n, m| self.z_at(n, m).map(|z| z.to_string()).unwrap_or_default();
        for n in 1..=self.n_max {
            let _ = writeln!(s, "{n},0,,{},,{}", self.u_bottom[n - 1], zs(n, 0));
        }
        for m in 1..=self.m_max {
            let _ = writeln!(s, "0,{m},,,{},{}", self.v_left[m - 1], zs(0, m));
        }
        for n in 1..=self.n_max {
            for m in 1..=self.m_max {
                let _ = writeln!(
                    s,
                    "{n},{m},{},{},{},{}",
                    self.x_at(n, m),
                    self.u_at(n, m),
                    self.v_at(n, m),
                    zs(n, m)
                );
            }
        }
        s
    }

    /// Write a little-endian `f64` dump of `X`, `U`, `V` (and `Z` when
    /// present) to `path`, plus a JSON sidecar at `path` + `.json`.
    ///
    /// `X`, `U`, `V` are `n_max × m_max`; `Z` is `(n_max + 1) × (m_max + 1)`.
    /// Both files are written to a temporary name and renamed into place.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(8 * (3 * self.x.len() + self.z.as_ref().map_or(0, |z| z.len())));
        let mut arrays = vec!["X", "U", "V"];
        for arr in [&self.x, &self.u, &self.v] {
            for v in arr.iter() {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
        if let Some(z) = &self.z {
            arrays.push("Z");
            for v in z {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
        let sidecar = Sidecar {
            dtype: "f64-le",
            order: "row-major",
            n_max: self.n_max,
            m_max: self.m_max,
            arrays,
            model: (self.kernels.len() == 1).then(|| MapSpec::from(self.kernels[0])),
            boundary: self.boundary.clone(),
        };
        let json = serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Domain(e.to_string()))?;
        write_atomic(path, &bytes)?;
        let mut side = path.as_os_str().to_owned();
        side.push(".json");
        write_atomic(Path::new(&side), json.as_bytes())
    }
}

/// Partition recursion at one site from its left and lower neighbours.
#[inline]
fn z_step(k: &LocalMap, x: f64, left: f64, below: f64) -> f64 {
    match *k {
        LocalMap::RRpe { a, b } => log_sum_exp(x.ln() + left, (a * x + b).ln() + below),
        LocalMap::RRps | LocalMap::DToda => -x.ln() + log_sum_exp(left, below),
        _ => x + left.max(below),
    }
}

#[derive(Serialize)]
struct Sidecar {
    dtype: &'static str,
    order: &'static str,
    n_max: usize,
    m_max: usize,
    arrays: Vec<&'static str>,
    model: Option<MapSpec>,
    boundary: Option<(DistributionSpec, DistributionSpec)>,
}

/// Write `bytes` to a temporary file next to `path`, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn draw_grid(bulk: &Distribution, n: usize, m: usize, rng: &RngStream) -> Vec<f64> {
    let mut x = Vec::with_capacity(n * m);
    for i in 0..n {
        let mut r = rng.child(2 + i as u64);
        x.extend((0..m).map(|_| bulk.sample(&mut r)));
    }
    x
}

/// Fill an `n × m` quadrant with i.i.d. boundaries and bulk.
///
/// `boundary_x` is the law of `U_{n,0}`, `boundary_u` that of `V_{0,m}`.
/// Random streams: child 0 for the bottom boundary, child 1 for the left
/// boundary, child `2 + i` for bulk column `i`.
pub fn run_quadrant(
    model: &LocalMap,
    boundary_x: &DistributionSpec,
    boundary_u: &DistributionSpec,
    bulk: &DistributionSpec,
    n: usize,
    m: usize,
    rng: &RngStream,
) -> Result<QuadrantField> {
    model.validate()?;
    let (bx, bu, bk) = (boundary_x.build()?, boundary_u.build()?, bulk.build()?);
    let (s_bulk, s_x, s_u) = spaces(model);
    check_law(&bk, s_bulk, "bulk", model)?;
    check_law(&bx, s_x, "bottom boundary", model)?;
    check_law(&bu, s_u, "left boundary", model)?;
    if n == 0 || m == 0 {
        return Err(Error::Domain("quadrant dimensions must be at least 1".into()));
    }
    let u_bottom = bx.sample_n(&mut rng.child(0), n);
    let v_left = bu.sample_n(&mut rng.child(1), m);
    let x = draw_grid(&bk, n, m, rng);
    let mut f = QuadrantField::fill(vec![*model], x, u_bottom, v_left)?;
    f.boundary = Some((boundary_x.clone(), boundary_u.clone()));
    Ok(f)
}

/// Higher-spin vertex model with `J_spin = 1` on `n` sites and `t` steps,
/// driven by uniform noise.
pub fn hsv_run(
    params: &LocalMap,
    boundary_x: &DistributionSpec,
    boundary_u: &DistributionSpec,
    n: usize,
    t: usize,
    rng: &RngStream,
) -> Result<QuadrantField> {
    if !matches!(params, LocalMap::RHsv { .. }) {
        return Err(Error::UnsupportedFamily(format!("hsv_run needs R_HSV, got {}", params.name())));
    }
    run_quadrant(params, boundary_x, boundary_u, &DistributionSpec::uniform01(), n, t, rng)
}

/// Quadrant with site-dependent kernels and per-row / per-column boundary
/// laws: `U_{n,0} ~ boundary_x[n - 1]`, `V_{0,m} ~ boundary_u[m - 1]`.
pub fn run_quadrant_inhomogeneous(
    kernels: impl Fn(usize, usize) -> LocalMap,
    boundary_x: &[DistributionSpec],
    boundary_u: &[DistributionSpec],
    bulk: &DistributionSpec,
    rng: &RngStream,
) -> Result<QuadrantField> {
    let (n, m) = (boundary_x.len(), boundary_u.len());
    if n == 0 || m == 0 {
        return Err(Error::Domain("quadrant dimensions must be at least 1".into()));
    }
    let mut maps = Vec::with_capacity(n * m);
    for i in 1..=n {
        for j in 1..=m {
            maps.push(kernels(i, j));
        }
    }
    let bk = bulk.build()?;
    let mut r0 = rng.child(0);
    let u_bottom = boundary_x.iter().map(|s| Ok(s.build()?.sample(&mut r0))).collect::<Result<Vec<_>>>()?;
    let mut r1 = rng.child(1);
    let v_left = boundary_u.iter().map(|s| Ok(s.build()?.sample(&mut r1))).collect::<Result<Vec<_>>>()?;
    let x = draw_grid(&bk, n, m, rng);
    let maps = if maps.iter().all(|k| *k == maps[0]) { vec![maps[0]] } else { maps };
    QuadrantField::fill(maps, x, u_bottom, v_left)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_give_zero_field() {
        let d = DistributionSpec::dirac(0.0);
        let f = run_quadrant(&LocalMap::RDlpp, &d, &d, &d, 5, 4, &RngStream::new(1)).unwrap();
        assert!(f.u.iter().chain(&f.v).chain(f.z.as_ref().unwrap()).all(|&v| v == 0.0));
        assert_eq!(f.recursion_residual().unwrap(), 0.0);
    }

    #[test]
    fn polymer_rejects_negative_boundary() {
        let g = DistributionSpec::gamma(1.0, 1.0);
        let bad = DistributionSpec::s_exp(1.0, -1.0);
        assert!(run_quadrant(&LocalMap::RRps, &bad, &g, &g, 3, 3, &RngStream::new(1)).is_err());
    }

    #[test]
    fn anti_diagonal_cells() {
        let d = DistributionSpec::dirac(1.0);
        let f = run_quadrant(&LocalMap::RDlpp, &d, &d, &d, 3, 2, &RngStream::new(1)).unwrap();
        assert_eq!(f.anti_diagonal(4), vec![(2, 2), (3, 1)]);
    }
}
