//! Stationarity of the stochastic quadrant models.

use super::report::{ReportBuilder, TestReport};
use super::stats::{chi2_independence, marginal_test};
use super::TestSettings;
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::lattice_maps::LocalMap;
use crate::rng::RngStream;
use crate::stochastic_lattice::run_quadrant;

/// Largest recursion residual tolerated on a rational quadrant field.
pub const QUADRANT_RESIDUAL: f64 = 1e-9;

/// Stationarity of a quadrant with i.i.d. boundaries.
///
/// Runs `samples` independent `size × size` quadrants on child streams of
/// `rng`. At the central site `h = size / 2` it tests `U_{h,h}` against
/// `boundary_x`, `V_{h,h}` against `boundary_u`, and independence of the
/// anti-diagonal neighbours `(U_{h,h}, U_{h+1,h-1})`. Every field must also
/// satisfy its recursion to [`QUADRANT_RESIDUAL`].
#[allow(clippy::too_many_arguments)]
pub fn check_quadrant_stationarity(
    model: &LocalMap,
    boundary_x: &DistributionSpec,
    boundary_u: &DistributionSpec,
    bulk: &DistributionSpec,
    size: usize,
    samples: usize,
    rng: &RngStream,
    settings: &TestSettings,
) -> Result<TestReport> {
    if size < 2 {
        return Err(Error::Domain("quadrant size must be at least 2".into()));
    }
    if samples == 0 {
        return Err(Error::EmptySample);
    }
    let (lx, lu) = (boundary_x.build()?, boundary_u.build()?);
    let h = size / 2;
    let (mut us, mut vs, mut pairs) = (Vec::with_capacity(samples), Vec::with_capacity(samples), Vec::with_capacity(samples));
    let mut residual = 0.0f64;
    for k in 0..samples {
        let f = run_quadrant(model, boundary_x, boundary_u, bulk, size, size, &rng.child(k as u64))?;
        residual = residual.max(f.recursion_residual()?);
        us.push(f.u_at(h, h));
        vs.push(f.v_at(h, h));
        pairs.push((f.u_at(h, h), f.u_at(h + 1, h - 1)));
    }
    let bins = settings.bins.min(((samples / 25) as f64).sqrt() as usize);
    let mut rep = ReportBuilder::new(
        format!("quadrant_stationarity.{}", model.name()),
        "stationary boundary laws persist in the bulk",
        rng.seed(),
        settings.alpha,
    );
    rep.p_value("u", marginal_test(&us, &lx)?.p_value)
        .p_value("v", marginal_test(&vs, &lu)?.p_value)
        .bound("recursion_residual", residual, QUADRANT_RESIDUAL)
        .detail("size", size as f64)
        .detail("independence_bins", bins as f64);
    if bins >= 2 {
        rep.p_value("anti_diagonal_independence", chi2_independence(&pairs, bins)?.p_value);
    }
    Ok(rep.finish(samples))
}
