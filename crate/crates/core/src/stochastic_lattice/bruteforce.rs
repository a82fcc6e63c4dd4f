//! Point-to-point partition functions by recursion and by path enumeration.
//!
//! `weights[i][j]` is the weight `X_{i+1, j+1}`; the first index is the
//! horizontal coordinate `n`, the second the vertical coordinate `m`. Up-right
//! paths start at `(1, 1)`.

use crate::distributions::log_sum_exp;
use crate::error::{Error, Result};

/// Largest grid side accepted by the enumeration oracles.
pub const BRUTEFORCE_MAX: usize = 12;

/// Weighting of up-right paths in a directed polymer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PolymerMode {
    /// Path weight is the product of `X` over visited sites.
    Site,
    /// A step into `(k, l)` from the left weighs `X_{k,l}`, from below
    /// `h(X_{k,l}) = A X_{k,l} + B`.
    Edge { a: f64, b: f64 },
}

fn shape(weights: &[Vec<f64>]) -> Result<(usize, usize)> {
    let n = weights.len();
    let m = weights.first().map(|r| r.len()).unwrap_or(0);
    if n == 0 || m == 0 || weights.iter().any(|r| r.len() != m) {
        return Err(Error::Domain("weights must form a nonempty rectangular grid".into()));
    }
    Ok((n, m))
}

fn oracle_shape(weights: &[Vec<f64>]) -> Result<(usize, usize)> {
    let (n, m) = shape(weights)?;
    if n > BRUTEFORCE_MAX || m > BRUTEFORCE_MAX {
        return Err(Error::TooLarge(format!("{n}x{m} exceeds {BRUTEFORCE_MAX}x{BRUTEFORCE_MAX}")));
    }
    Ok((n, m))
}

/// Log weights of horizontal and vertical steps into each site.
fn step_logs(weights: &[Vec<f64>], mode: PolymerMode) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let mut right = weights.to_vec();
    let mut up = weights.to_vec();
    for (i, row) in weights.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            let h = match mode {
                PolymerMode::Site => x,
                PolymerMode::Edge { a, b } => a * x + b,
            };
            if !(x > 0.0 && h > 0.0) {
                return Err(Error::Domain(format!("nonpositive polymer weight at ({}, {})", i + 1, j + 1)));
            }
            right[i][j] = x.ln();
            up[i][j] = h.ln();
        }
    }
    Ok((right, up))
}

/// `Z_{n,m} = X_{n,m} + max{Z_{n-1,m}, Z_{n,m-1}}` with `Z = -∞` off the grid
/// except `Z_{1,1} = X_{1,1}`.
pub fn dlpp_recursion(weights: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let (n, m) = shape(weights)?;
    let mut z = vec![vec![0.0f64; m]; n];
    for i in 0..n {
        for j in 0..m {
            let prev = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => z[0][j - 1],
                (_, 0) => z[i - 1][0],
                _ => z[i - 1][j].max(z[i][j - 1]),
            };
            z[i][j] = weights[i][j] + prev;
        }
    }
    Ok(z)
}

/// Maximum of path sums over every up-right path from `(1, 1)` to each site.
pub fn dlpp_bruteforce(weights: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let (n, m) = oracle_shape(weights)?;
    let mut best = vec![vec![f64::NEG_INFINITY; m]; n];
    fn walk(w: &[Vec<f64>], best: &mut [Vec<f64>], i: usize, j: usize, acc: f64) {
        let s = acc + w[i][j];
        if s > best[i][j] {
            best[i][j] = s;
        }
        if i + 1 < w.len() {
            walk(w, best, i + 1, j, s);
        }
        if j + 1 < w[0].len() {
            walk(w, best, i, j + 1, s);
        }
    }
    walk(weights, &mut best, 0, 0, 0.0);
    Ok(best)
}

/// `log Z` of the polymer by recursion.
///
/// Site: `Z_{n,m} = X_{n,m}(Z_{n-1,m} + Z_{n,m-1})`, `Z_{1,1} = X_{1,1}`.
/// Edge: `Z_{n,m} = X_{n,m} Z_{n-1,m} + h(X_{n,m}) Z_{n,m-1}`, `Z_{1,1} = 1`.
pub fn polymer_recursion(weights: &[Vec<f64>], mode: PolymerMode) -> Result<Vec<Vec<f64>>> {
    let (n, m) = shape(weights)?;
    let (right, up) = step_logs(weights, mode)?;
    let mut lz = vec![vec![f64::NEG_INFINITY; m]; n];
    for i in 0..n {
        for j in 0..m {
            let left = if i > 0 { lz[i - 1][j] } else { f64::NEG_INFINITY };
            let below = if j > 0 { lz[i][j - 1] } else { f64::NEG_INFINITY };
            lz[i][j] = match mode {
                PolymerMode::Site => {
                    let inner = if i == 0 && j == 0 { 0.0 } else { log_sum_exp(left, below) };
                    right[i][j] + inner
                }
                PolymerMode::Edge { .. } => {
                    if i == 0 && j == 0 {
                        0.0
                    } else {
                        log_sum_exp(right[i][j] + left, up[i][j] + below)
                    }
                }
            };
        }
    }
    Ok(lz)
}

/// `log Z` of the polymer as a log-sum-exp over every enumerated path.
pub fn polymer_bruteforce(weights: &[Vec<f64>], mode: PolymerMode) -> Result<Vec<Vec<f64>>> {
    let (n, m) = oracle_shape(weights)?;
    let (right, up) = step_logs(weights, mode)?;
    let mut lz = vec![vec![f64::NEG_INFINITY; m]; n];
    let start = match mode {
        PolymerMode::Site => right[0][0],
        PolymerMode::Edge { .. } => 0.0,
    };
    let site = matches!(mode, PolymerMode::Site);
    let mut stack = vec![(0usize, 0usize, start)];
    while let Some((i, j, acc)) = stack.pop() {
        lz[i][j] = log_sum_exp(lz[i][j], acc);
        if i + 1 < n {
            stack.push((i + 1, j, acc + right[i + 1][j]));
        }
        if j + 1 < m {
            let w = if site { right[i][j + 1] } else { up[i][j + 1] };
            stack.push((i, j + 1, acc + w));
        }
    }
    Ok(lz)
}
