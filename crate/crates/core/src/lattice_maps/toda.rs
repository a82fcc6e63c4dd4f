//! Toda-type star maps and the three-point involutions they generate.

use crate::error::{Error, Result};

/// Max-plus star map `(x, u) ↦ (min{x,u}, x - u)`.
#[inline]
pub fn udtoda_star(x: f64, u: f64) -> (f64, f64) {
    (x.min(u), x - u)
}

/// Inverse of [`udtoda_star`]: `(x, u) ↦ (x + max{u,0}, x - min{u,0})`.
#[inline]
pub fn udtoda_star_inv(x: f64, u: f64) -> (f64, f64) {
    (x + u.max(0.0), x - u.min(0.0))
}

/// Ultra-discrete Toda map on `(a, b, c) = (Q_{n+1}, E_n, U_n)`.
///
/// Returns `(Q'_n, E'_n, U_{n+1}) = (min{b,c}, a + b - min{b,c}, a + c - min{b,c})`.
#[inline]
pub fn udtoda_map(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    let m = b.min(c);
    (m, a + b - m, a + c - m)
}

/// Rational star map `(x, u) ↦ (x + u, x/(x + u))`.
#[inline]
pub fn dtoda_star(x: f64, u: f64) -> Result<(f64, f64)> {
    if !(x > 0.0 && u > 0.0) {
        return Err(Error::Domain(format!("dTodaStar requires x, u > 0, got ({x}, {u})")));
    }
    let s = x + u;
    Ok((s, x / s))
}

/// Inverse of [`dtoda_star`]: `(x, u) ↦ (xu, x(1 - u))`.
#[inline]
pub fn dtoda_star_inv(x: f64, u: f64) -> Result<(f64, f64)> {
    if !(x > 0.0 && u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!(
            "dTodaStar inverse requires x > 0, 0 < u < 1, got ({x}, {u})"
        )));
    }
    Ok((x * u, x * (1.0 - u)))
}

/// Discrete Toda map on `(a, b, c) = (I_{n+1}, J_n, U_n)`.
///
/// Returns `(b + c, ab/(b + c), ac/(b + c))`.
#[inline]
pub fn dtoda_map(a: f64, b: f64, c: f64) -> Result<(f64, f64, f64)> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return Err(Error::Domain(format!("dToda requires positive inputs, got ({a}, {b}, {c})")));
    }
    let s = b + c;
    Ok((s, a * b / s, a * c / s))
}
