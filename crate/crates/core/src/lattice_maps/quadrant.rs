//! Recursion kernels of the stochastic quadrant models.

use crate::error::{Error, Result};

/// Last passage kernel `(a, b, c) ↦ (a + b - min{b,c}, a + c - min{b,c})`.
#[inline]
pub fn r_dlpp(a: f64, b: f64, c: f64) -> (f64, f64) {
    let m = b.min(c);
    (a + b - m, a + c - m)
}

/// Site-weight polymer kernel on inverse variables: `(ab/(b+c), ac/(b+c))`.
#[inline]
pub fn r_rps(a: f64, b: f64, c: f64) -> Result<(f64, f64)> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return Err(Error::Domain(format!("R_RPs requires positive inputs, got ({a}, {b}, {c})")));
    }
    let s = b + c;
    Ok((a * b / s, a * c / s))
}

/// Edge-weight polymer kernel `(a + h(a)b/c, h(a) + ac/b)` with `h(x) = Ax + B`.
#[inline]
pub fn r_rpe(ca: f64, cb: f64, a: f64, b: f64, c: f64) -> Result<(f64, f64)> {
    let h = ca * a + cb;
    if !(a > 0.0 && b > 0.0 && c > 0.0 && h > 0.0) {
        return Err(Error::Domain(format!(
            "R_RPe requires positive inputs and h(a) > 0, got ({a}, {b}, {c}), h = {h}"
        )));
    }
    Ok((a + h * b / c, h + a * c / b))
}

/// Flip thresholds `(c_{i,0}, c_{i,1})` of the spin-1/2 vertex kernel.
#[inline]
pub fn hsv_thresholds(alpha: f64, nu: f64, q: f64, i: u32) -> (f64, f64) {
    let qi = if i == 0 { 1.0 } else { q.powi(i as i32) };
    ((1.0 + alpha * qi) / (1.0 + alpha), (1.0 - nu * qi) / (1.0 + alpha))
}

/// Vertex update: state `(i, j)` with driving uniform `w` becomes
/// `(i + j - 1{w ≥ c_{i,j}}, 1{w ≥ c_{i,j}})`.
#[inline]
pub fn r_hsv(alpha: f64, nu: f64, q: f64, w: f64, i: f64, j: f64) -> Result<(f64, f64)> {
    if !(i >= 0.0 && i.fract() == 0.0) {
        return Err(Error::Domain(format!("vertex occupation must be a nonnegative integer, got {i}")));
    }
    if j != 0.0 && j != 1.0 {
        return Err(Error::Domain(format!("vertex input j must be 0 or 1, got {j}")));
    }
    let (c0, c1) = hsv_thresholds(alpha, nu, q, i as u32);
    let c = if j == 0.0 { c0 } else { c1 };
    let out = if w >= c { 1.0 } else { 0.0 };
    Ok((i + j - out, out))
}
