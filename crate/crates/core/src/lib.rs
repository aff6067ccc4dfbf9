//! Simulation core for a Keen-type debt economy coupled to an asset market
//! whose jump intensities follow debt-financed speculative flow, and whose
//! trend feeds back into the lending rate.
//!
//! The crate is `no_std` (with `alloc`). File formats, parallel sweeps and the
//! command-line tool live in the `keenjump` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analytics;
pub mod config;
pub mod econ;
pub mod integrator;
pub mod magnitude;
pub mod market;
pub mod montecarlo;
pub mod params;
pub mod rng;
pub mod stats;

pub use econ::{EconDerived, EconState};
pub use integrator::{simulate_path, simulate_path_with, JumpEvent, JumpKind, Sample, Status, Trajectory};
pub use market::MarketState;
pub use montecarlo::{CrisisCriterion, CrisisReason, McResult};
pub use params::{default_params, ModelParams, SimConfig};
pub use rng::RngStream;
