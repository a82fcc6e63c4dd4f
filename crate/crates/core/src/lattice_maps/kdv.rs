//! KdV-type two-point maps and their Toda-side conjugates.

use crate::error::{Error, Result};

/// `max{s - t, 0}` with an infinite threshold giving zero.
#[inline]
fn excess(s: f64, t: f64) -> f64 {
    if t == f64::INFINITY {
        0.0
    } else {
        (s - t).max(0.0)
    }
}

/// Ultra-discrete KdV map `F^(J,K)`: box capacity `J`, carrier capacity `K`.
///
/// Conserves `x + u` and is an involution.
#[inline]
pub fn udkdv_map(j: f64, k: f64, x: f64, u: f64) -> (f64, f64) {
    let s = x + u;
    let d = excess(s, k) - excess(s, j);
    (u + d, x - d)
}

/// Discrete KdV map `F^(α,β)` on `(0, ∞)²`.
///
/// Conserves `xu` and `αx + 1/x + βu + 1/u` and is an involution.
#[inline]
pub fn dkdv_map(alpha: f64, beta: f64, x: f64, u: f64) -> Result<(f64, f64)> {
    if !(x > 0.0 && u > 0.0) {
        return Err(Error::Domain(format!("dKdV requires x, u > 0, got ({x}, {u})")));
    }
    let p = x * u;
    if p > 1.0 {
        let w = 1.0 / p;
        Ok((u * (beta + w) / (alpha + w), x * (alpha + w) / (beta + w)))
    } else {
        Ok((u * (1.0 + beta * p) / (1.0 + alpha * p), x * (1.0 + alpha * p) / (1.0 + beta * p)))
    }
}

/// Max-plus Toda-side involution `K_udT(a, b) = (-min{a,b}, b - a - min{a,b})`.
#[inline]
pub fn k_udt(a: f64, b: f64) -> (f64, f64) {
    let m = a.min(b);
    (-m, b - a - m)
}

/// Rational Toda-side involution `K_dT(a, b) = (1/(a+b), b/(a(a+b)))`.
#[inline]
pub fn k_dt(a: f64, b: f64) -> Result<(f64, f64)> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!("K_dT requires a, b > 0, got ({a}, {b})")));
    }
    let s = a + b;
    Ok((1.0 / s, b / (a * s)))
}

/// Coordinate change `A^(J)(x, u) = (J/2 - x, u - J/2)`.
#[inline]
pub fn conj_udt(j: f64, x: f64, u: f64) -> (f64, f64) {
    (0.5 * j - x, u - 0.5 * j)
}

/// Inverse of [`conj_udt`].
#[inline]
pub fn conj_udt_inv(j: f64, a: f64, b: f64) -> (f64, f64) {
    (0.5 * j - a, b + 0.5 * j)
}

/// Coordinate change `A^(α)(x, u) = (x√α, 1/(u√α))`.
#[inline]
pub fn conj_dt(alpha: f64, x: f64, u: f64) -> (f64, f64) {
    let r = alpha.sqrt();
    (x * r, 1.0 / (u * r))
}

/// Inverse of [`conj_dt`].
#[inline]
pub fn conj_dt_inv(alpha: f64, a: f64, b: f64) -> (f64, f64) {
    let r = alpha.sqrt();
    (a / r, 1.0 / (b * r))
}

/// `(A^(J))⁻¹ ∘ K_udT ∘ A^(J)`, which coincides with `F^(J,∞)`.
pub fn udkdv_via_toda(j: f64, x: f64, u: f64) -> (f64, f64) {
    let (a, b) = conj_udt(j, x, u);
    let (a, b) = k_udt(a, b);
    conj_udt_inv(j, a, b)
}

/// `(A^(α))⁻¹ ∘ K_dT ∘ A^(α)`, which coincides with `F^(α,0)`.
pub fn dkdv_via_toda(alpha: f64, x: f64, u: f64) -> Result<(f64, f64)> {
    let (a, b) = conj_dt(alpha, x, u);
    let (a, b) = k_dt(a, b)?;
    Ok(conj_dt_inv(alpha, a, b))
}
