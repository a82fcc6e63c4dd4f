//! Integrable lattice maps and their invariant product measures.
//!
//! The crate covers four local maps (the ultra-discrete and discrete KdV
//! maps, the ultra-discrete and discrete Toda maps), the carrier processes
//! that drive them on the integer lattice, the product measures left
//! invariant by the resulting dynamics, a family of stochastic quadrant
//! models sharing the same local structure, and a statistical harness that
//! checks all of it by exact enumeration and Monte Carlo.
//!
//! Modules:
//!
//! - [`distributions`]: samplers, densities, CDFs and pmf tables.
//! - [`lattice_maps`]: pure evaluations of every local map.
//! - [`carrier_solver`]: carriers on finite windows and time evolution.
//! - [`stochastic_lattice`]: last passage percolation, polymers, vertex model.
//! - [`verification`]: statistical tests and the checks built on them.
//! - [`experiment`]: JSON configuration, orchestration and output files.

pub mod carrier_solver;
pub mod distributions;
pub mod error;
pub mod experiment;
pub mod lattice_maps;
pub mod params;
pub mod rng;
pub mod stochastic_lattice;
pub mod verification;

pub use error::{Error, Result};
pub use rng::RngStream;
