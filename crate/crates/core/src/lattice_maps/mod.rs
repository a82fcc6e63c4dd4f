//! Local lattice maps.
//!
//! A [`LocalMap`] names one of the integrable maps, a star map whose
//! three-point involution drives a type II model, a coordinate-changed
//! Toda-side involution, or a quadrant recursion kernel. Free functions in
//! the submodules evaluate each map directly.
//!
//! Parameters per family (JSON names):
//!
//! | family       | parameters |
//! |--------------|------------|
//! | `udKdV`      | `J`, `K` (either may be `"inf"`) |
//! | `dKdV`       | `alpha`, `beta` |
//! | `udTodaStar`, `udToda`, `dTodaStar`, `dToda`, `R_DLPP`, `R_RPs` | none |
//! | `K_udT`      | `J` (coordinate change, default 0) |
//! | `K_dT`       | `alpha` (coordinate change, default 1) |
//! | `R_RPe`      | `A`, `B` with `h(x) = Ax + B` |
//! | `R_HSV`      | `alpha_v`, `nu_v`, `q`, optional `J_spin` (must be 1) |

pub mod kdv;
pub mod quadrant;
pub mod toda;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;

pub use kdv::{
    conj_dt, conj_dt_inv, conj_udt, conj_udt_inv, dkdv_map, dkdv_via_toda, k_dt, k_udt, udkdv_map,
    udkdv_via_toda,
};
pub use quadrant::{hsv_thresholds, r_dlpp, r_hsv, r_rpe, r_rps};
pub use toda::{dtoda_map, dtoda_star, dtoda_star_inv, udtoda_map, udtoda_star, udtoda_star_inv};

/// Family tag of a local map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MapFamily {
    #[serde(rename = "udKdV")]
    UdKdV,
    #[serde(rename = "dKdV")]
    DKdV,
    #[serde(rename = "udTodaStar")]
    UdTodaStar,
    #[serde(rename = "udToda")]
    UdToda,
    #[serde(rename = "dTodaStar")]
    DTodaStar,
    #[serde(rename = "dToda")]
    DToda,
    #[serde(rename = "K_udT")]
    KUdT,
    #[serde(rename = "K_dT")]
    KDT,
    #[serde(rename = "R_DLPP")]
    RDlpp,
    #[serde(rename = "R_RPs")]
    RRps,
    #[serde(rename = "R_RPe")]
    RRpe,
    #[serde(rename = "R_HSV")]
    RHsv,
}

/// Serialized form of a [`LocalMap`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub family: MapFamily,
    #[serde(default)]
    pub params: Params,
}

/// A validated local map with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapSpec", into = "MapSpec")]
pub enum LocalMap {
    UdKdV { j: f64, k: f64 },
    DKdV { alpha: f64, beta: f64 },
    UdTodaStar,
    UdToda,
    DTodaStar,
    DToda,
    KUdT { j: f64 },
    KDT { alpha: f64 },
    RDlpp,
    RRps,
    RRpe { a: f64, b: f64 },
    RHsv { alpha: f64, nu: f64, q: f64 },
}

/// Lattice type of the dynamics a map drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LatticeKind {
    /// Homogeneous lattice driven by one two-point involution.
    #[serde(rename = "typeI")]
    TypeI,
    /// Bipartite lattice driven by a star map and its inverse.
    #[serde(rename = "typeII")]
    TypeII,
}

/// Conjugating symmetry for [`LocalMap::apply_symmetry`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Symmetry {
    /// Additive shift by `r` (max-plus maps).
    Shift(f64),
    /// Scaling by `λ > 0`.
    Scale(f64),
    /// Empty space-particle reflection.
    SpaceParticle,
}

impl TryFrom<MapSpec> for LocalMap {
    type Error = Error;

    fn try_from(s: MapSpec) -> Result<Self> {
        let p = &s.params;
        let map = match s.family {
            MapFamily::UdKdV => LocalMap::UdKdV { j: p.require("udKdV", "J")?, k: p.require("udKdV", "K")? },
            MapFamily::DKdV => LocalMap::DKdV {
                alpha: p.require("dKdV", "alpha")?,
                beta: p.require("dKdV", "beta")?,
            },
            MapFamily::UdTodaStar => LocalMap::UdTodaStar,
            MapFamily::UdToda => LocalMap::UdToda,
            MapFamily::DTodaStar => LocalMap::DTodaStar,
            MapFamily::DToda => LocalMap::DToda,
            MapFamily::KUdT => LocalMap::KUdT { j: p.get_or("J", 0.0) },
            MapFamily::KDT => LocalMap::KDT { alpha: p.get_or("alpha", 1.0) },
            MapFamily::RDlpp => LocalMap::RDlpp,
            MapFamily::RRps => LocalMap::RRps,
            MapFamily::RRpe => LocalMap::RRpe { a: p.require("R_RPe", "A")?, b: p.require("R_RPe", "B")? },
            MapFamily::RHsv => {
                if p.get_or("J_spin", 1.0) != 1.0 {
                    return Err(Error::UnsupportedRegime(
                        "R_HSV kernel is implemented for J_spin = 1 only".into(),
                    ));
                }
                LocalMap::RHsv {
                    alpha: p.require("R_HSV", "alpha_v")?,
                    nu: p.require("R_HSV", "nu_v")?,
                    q: p.require("R_HSV", "q")?,
                }
            }
        };
        map.validate()?;
        Ok(map)
    }
}

impl From<LocalMap> for MapSpec {
    fn from(m: LocalMap) -> Self {
        let params = match m {
            LocalMap::UdKdV { j, k } => Params::new().with("J", j).with("K", k),
            LocalMap::DKdV { alpha, beta } => Params::new().with("alpha", alpha).with("beta", beta),
            LocalMap::KUdT { j } => Params::new().with("J", j),
            LocalMap::KDT { alpha } => Params::new().with("alpha", alpha),
            LocalMap::RRpe { a, b } => Params::new().with("A", a).with("B", b),
            LocalMap::RHsv { alpha, nu, q } => {
                Params::new().with("alpha_v", alpha).with("nu_v", nu).with("q", q)
            }
            _ => Params::new(),
        };
        MapSpec { family: m.family(), params }
    }
}

impl LocalMap {
    /// Family tag.
    pub fn family(&self) -> MapFamily {
        match self {
            LocalMap::UdKdV { .. } => MapFamily::UdKdV,
            LocalMap::DKdV { .. } => MapFamily::DKdV,
            LocalMap::UdTodaStar => MapFamily::UdTodaStar,
            LocalMap::UdToda => MapFamily::UdToda,
            LocalMap::DTodaStar => MapFamily::DTodaStar,
            LocalMap::DToda => MapFamily::DToda,
            LocalMap::KUdT { .. } => MapFamily::KUdT,
            LocalMap::KDT { .. } => MapFamily::KDT,
            LocalMap::RDlpp => MapFamily::RDlpp,
            LocalMap::RRps => MapFamily::RRps,
            LocalMap::RRpe { .. } => MapFamily::RRpe,
            LocalMap::RHsv { .. } => MapFamily::RHsv,
        }
    }

    /// Family name as used in JSON.
    pub fn name(&self) -> &'static str {
        match self.family() {
            MapFamily::UdKdV => "udKdV",
            MapFamily::DKdV => "dKdV",
            MapFamily::UdTodaStar => "udTodaStar",
            MapFamily::UdToda => "udToda",
            MapFamily::DTodaStar => "dTodaStar",
            MapFamily::DToda => "dToda",
            MapFamily::KUdT => "K_udT",
            MapFamily::KDT => "K_dT",
            MapFamily::RDlpp => "R_DLPP",
            MapFamily::RRps => "R_RPs",
            MapFamily::RRpe => "R_RPe",
            MapFamily::RHsv => "R_HSV",
        }
    }

    /// Check parameter domains.
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Err(Error::params(self.name(), reason));
        match *self {
            LocalMap::UdKdV { j, k } => {
                if j.is_nan() || k.is_nan() || j == f64::NEG_INFINITY || k == f64::NEG_INFINITY {
                    return bad("J, K must lie in ℝ ∪ {∞}");
                }
            }
            LocalMap::DKdV { alpha, beta } => {
                if !(alpha >= 0.0 && beta >= 0.0 && alpha.is_finite() && beta.is_finite()) {
                    return bad("requires finite alpha, beta >= 0");
                }
            }
            LocalMap::KUdT { j } => {
                if !j.is_finite() {
                    return bad("J must be finite");
                }
            }
            LocalMap::KDT { alpha } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return bad("alpha must be positive");
                }
            }
            LocalMap::RRpe { a, b } => {
                if !(a.is_finite() && b.is_finite()) {
                    return bad("A, B must be finite");
                }
            }
            LocalMap::RHsv { alpha, nu, q } => {
                if !(alpha >= 0.0 && alpha.is_finite()) || !(0.0..1.0).contains(&nu) || !(0.0..1.0).contains(&q) {
                    return bad("requires alpha_v >= 0 and nu_v, q in [0, 1)");
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Lattice type this map drives, if it drives a lattice dynamics.
    pub fn lattice_kind(&self) -> Option<LatticeKind> {
        match self {
            LocalMap::UdKdV { .. } | LocalMap::DKdV { .. } | LocalMap::KUdT { .. } | LocalMap::KDT { .. } => {
                Some(LatticeKind::TypeI)
            }
            LocalMap::UdToda | LocalMap::DToda | LocalMap::UdTodaStar | LocalMap::DTodaStar => {
                Some(LatticeKind::TypeII)
            }
            _ => None,
        }
    }

    /// True for piecewise-linear maps evaluated exactly in binary64.
    pub fn is_max_plus(&self) -> bool {
        matches!(
            self,
            LocalMap::UdKdV { .. } | LocalMap::UdTodaStar | LocalMap::UdToda | LocalMap::KUdT { .. } | LocalMap::RDlpp
        )
    }

    /// True when the state space is `(0, ∞)`.
    pub fn is_positive(&self) -> bool {
        matches!(
            self,
            LocalMap::DKdV { .. } | LocalMap::DTodaStar | LocalMap::DToda | LocalMap::KDT { .. } | LocalMap::RRps | LocalMap::RRpe { .. }
        )
    }

    /// Star map of a three-point Toda map, or the map itself for a star.
    pub fn star(&self) -> Option<LocalMap> {
        match self {
            LocalMap::UdToda | LocalMap::UdTodaStar => Some(LocalMap::UdTodaStar),
            LocalMap::DToda | LocalMap::DTodaStar => Some(LocalMap::DTodaStar),
            _ => None,
        }
    }

    /// Evaluate a two-point map.
    #[inline]
    pub fn apply2(&self, x: f64, u: f64) -> Result<(f64, f64)> {
        match *self {
            LocalMap::UdKdV { j, k } => Ok(udkdv_map(j, k, x, u)),
            LocalMap::DKdV { alpha, beta } => dkdv_map(alpha, beta, x, u),
            LocalMap::UdTodaStar => Ok(udtoda_star(x, u)),
            LocalMap::DTodaStar => dtoda_star(x, u),
            LocalMap::KUdT { .. } => Ok(k_udt(x, u)),
            LocalMap::KDT { .. } => k_dt(x, u),
            _ => Err(Error::UnsupportedFamily(format!("{} is not a two-point map", self.name()))),
        }
    }

    /// Evaluate the inverse of a two-point map (the map itself for involutions).
    #[inline]
    pub fn apply2_inv(&self, x: f64, u: f64) -> Result<(f64, f64)> {
        match *self {
            LocalMap::UdTodaStar => Ok(udtoda_star_inv(x, u)),
            LocalMap::DTodaStar => dtoda_star_inv(x, u),
            _ => self.apply2(x, u),
        }
    }

    /// Evaluate a three-point Toda map on `(a, b, c)`.
    #[inline]
    pub fn apply3(&self, a: f64, b: f64, c: f64) -> Result<(f64, f64, f64)> {
        match self {
            LocalMap::UdToda => Ok(udtoda_map(a, b, c)),
            LocalMap::DToda => dtoda_map(a, b, c),
            _ => Err(Error::UnsupportedFamily(format!("{} is not a three-point map", self.name()))),
        }
    }

    /// Evaluate a quadrant kernel `R(x̃, x, u)`.
    #[inline]
    pub fn quadrant_kernel(&self, tilde_x: f64, x: f64, u: f64) -> Result<(f64, f64)> {
        quadrant_kernel(self, tilde_x, x, u)
    }

    /// Evaluate the map conjugated by `sym` at `(x, u)`.
    ///
    /// * `Shift(r)` on udKdV: `F^(J-2r, K-2r)(x - r, u - r)`, equal to `F(x, u) - (r, r)`.
    /// * `Scale(λ)` on udKdV: `F^(λJ, λK)(λx, λu)`, equal to `λ F(x, u)`.
    /// * `Scale(λ)` on dKdV: `F^(α/λ², β/λ²)(λx, λu)`, equal to `λ F(x, u)`.
    /// * `SpaceParticle`: `σ ∘ F ∘ σ (x, u)`, equal to `F(x, u)`, where `σ` is
    ///   `(J - x, K - u)` for udKdV and `(1/(αx), 1/(βu))` for dKdV.
    pub fn apply_symmetry(&self, sym: Symmetry, x: f64, u: f64) -> Result<(f64, f64)> {
        match (*self, sym) {
            (LocalMap::UdKdV { j, k }, Symmetry::Shift(r)) => {
                if r == 0.0 {
                    return Ok(udkdv_map(j, k, x, u));
                }
                if !j.is_finite() || !k.is_finite() || !r.is_finite() {
                    return Err(Error::Domain("shift with an infinite J or K is undefined".into()));
                }
                Ok(udkdv_map(j - 2.0 * r, k - 2.0 * r, x - r, u - r))
            }
            (LocalMap::UdKdV { j, k }, Symmetry::Scale(l)) => {
                if !(l > 0.0 && l.is_finite()) {
                    return Err(Error::Domain(format!("scale factor must be positive, got {l}")));
                }
                Ok(udkdv_map(l * j, l * k, l * x, l * u))
            }
            (LocalMap::UdKdV { j, k }, Symmetry::SpaceParticle) => {
                if !j.is_finite() || !k.is_finite() {
                    return Err(Error::Domain("space-particle duality requires finite J, K".into()));
                }
                let (a, b) = udkdv_map(j, k, j - x, k - u);
                Ok((j - a, k - b))
            }
            (LocalMap::DKdV { alpha, beta }, Symmetry::Scale(l)) => {
                if !(l > 0.0 && l.is_finite()) {
                    return Err(Error::Domain(format!("scale factor must be positive, got {l}")));
                }
                dkdv_map(alpha / (l * l), beta / (l * l), l * x, l * u)
            }
            (LocalMap::DKdV { alpha, beta }, Symmetry::SpaceParticle) => {
                if !(alpha > 0.0 && beta > 0.0) {
                    return Err(Error::Domain("space-particle duality requires alpha, beta > 0".into()));
                }
                let (a, b) = dkdv_map(alpha, beta, 1.0 / (alpha * x), 1.0 / (beta * u))?;
                Ok((1.0 / (alpha * a), 1.0 / (beta * b)))
            }
            (m, s) => Err(Error::Domain(format!("symmetry {s:?} is not defined for {}", m.name()))),
        }
    }
}

/// Three-point involution `F(a, b, c) = (F*¹(b, c), F*⁻¹(a, F*²(b, c)))`
/// assembled from a star map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreePointInvolution {
    star: LocalMap,
}

impl ThreePointInvolution {
    /// Star map the involution is built from.
    pub fn star(&self) -> LocalMap {
        self.star
    }

    /// Evaluate at `(a, b, c)`.
    #[inline]
    pub fn apply(&self, a: f64, b: f64, c: f64) -> Result<(f64, f64, f64)> {
        let (s1, s2) = self.star.apply2(b, c)?;
        let (t1, t2) = self.star.apply2_inv(a, s2)?;
        Ok((s1, t1, t2))
    }
}

/// Build the three-point involution of a star map.
pub fn three_point_involution(star: &LocalMap) -> Result<ThreePointInvolution> {
    match star {
        LocalMap::UdTodaStar | LocalMap::DTodaStar => Ok(ThreePointInvolution { star: *star }),
        m => Err(Error::NotInvertible(m.name().to_string())),
    }
}

/// Dual map `π ∘ F ∘ π` with `π(x, u) = (u, x)`, expressed in the same family.
pub fn dual_map(map: &LocalMap) -> Result<LocalMap> {
    match *map {
        LocalMap::UdKdV { j, k } => Ok(LocalMap::UdKdV { j: k, k: j }),
        LocalMap::DKdV { alpha, beta } => Ok(LocalMap::DKdV { alpha: beta, beta: alpha }),
        m => Err(Error::UnsupportedFamily(format!("no dual map for {}", m.name()))),
    }
}

/// Quadrant recursion kernel `R(x̃, x, u) = (x', u')`.
///
/// For `R_HSV`, `tilde_x` is the driving uniform and `(x, u)` is the integer
/// state `(i, j)`. For `R_RPs` all arguments are inverse variables.
pub fn quadrant_kernel(model: &LocalMap, tilde_x: f64, x: f64, u: f64) -> Result<(f64, f64)> {
    match *model {
        LocalMap::RDlpp => Ok(r_dlpp(tilde_x, x, u)),
        LocalMap::RRps => r_rps(tilde_x, x, u),
        LocalMap::RRpe { a, b } => r_rpe(a, b, tilde_x, x, u),
        LocalMap::RHsv { alpha, nu, q } => r_hsv(alpha, nu, q, tilde_x, x, u),
        m => Err(Error::UnsupportedFamily(format!("{} is not a quadrant kernel", m.name()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let m: LocalMap = serde_json::from_str(r#"{"family":"udKdV","params":{"J":1,"K":"inf"}}"#).unwrap();
        assert_eq!(m, LocalMap::UdKdV { j: 1.0, k: f64::INFINITY });
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"family":"udKdV","params":{"J":1.0,"K":"inf"}}"#);
        let h: LocalMap =
            serde_json::from_str(r#"{"family":"R_HSV","params":{"alpha_v":1,"nu_v":0.2,"q":0.5}}"#).unwrap();
        assert_eq!(h, LocalMap::RHsv { alpha: 1.0, nu: 0.2, q: 0.5 });
        assert!(serde_json::from_str::<LocalMap>(r#"{"family":"dKdV","params":{"alpha":-1,"beta":0}}"#).is_err());
        assert!(serde_json::from_str::<LocalMap>(
            r#"{"family":"R_HSV","params":{"alpha_v":1,"nu_v":0.2,"q":0.5,"J_spin":2}}"#
        )
        .is_err());
    }

    #[test]
    fn three_point_examples() {
        let u = three_point_involution(&LocalMap::UdTodaStar).unwrap();
        assert_eq!(u.apply(2.0, 1.0, 3.0).unwrap(), (1.0, 2.0, 4.0));
        let d = three_point_involution(&LocalMap::DTodaStar).unwrap();
        let (a, b, c) = d.apply(2.0, 3.0, 1.0).unwrap();
        assert!((a - 4.0).abs() < 1e-15 && (b - 1.5).abs() < 1e-15 && (c - 0.5).abs() < 1e-15);
        assert!(matches!(three_point_involution(&LocalMap::UdToda), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn dual_examples() {
        let m = LocalMap::UdKdV { j: 1.0, k: 3.0 };
        let d = dual_map(&m).unwrap();
        let (a, b) = m.apply2(0.7, 0.9).unwrap();
        let (c, e) = d.apply2(0.9, 0.7).unwrap();
        assert_eq!((a, b), (e, c));
        let dk = dual_map(&LocalMap::DKdV { alpha: 1.0, beta: 0.0 }).unwrap();
        assert_eq!(dk.apply2(1.0, 1.0).unwrap(), (2.0, 0.5));
        assert!(dual_map(&LocalMap::UdToda).is_err());
    }

    #[test]
    fn symmetry_examples() {
        let m = LocalMap::UdKdV { j: 1.0, k: 2.0 };
        assert_eq!(m.apply_symmetry(Symmetry::Shift(0.0), 0.5, 0.8).unwrap(), (0.5, 0.8));
        assert_eq!(m.apply_symmetry(Symmetry::Scale(2.0), 0.5, 0.8).unwrap(), (1.0, 1.6));
        let (a, b) = m.apply_symmetry(Symmetry::SpaceParticle, 0.5, 0.8).unwrap();
        assert!((a - 0.5).abs() < 1e-15 && (b - 0.8).abs() < 1e-15);
        let inf = LocalMap::UdKdV { j: 1.0, k: f64::INFINITY };
        assert!(inf.apply_symmetry(Symmetry::Shift(0.5), 0.5, 0.8).is_err());
        assert!(inf.apply_symmetry(Symmetry::SpaceParticle, 0.5, 0.8).is_err());
    }

    #[test]
    fn kernel_dispatch() {
        assert_eq!(quadrant_kernel(&LocalMap::RDlpp, 1.0, 2.0, 3.0).unwrap(), (1.0, 2.0));
        assert!(quadrant_kernel(&LocalMap::UdToda, 1.0, 2.0, 3.0).is_err());
    }
}
