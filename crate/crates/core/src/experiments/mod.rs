//! Seeded Monte Carlo sweeps.
//!
//! An [`ExperimentConfig`] names one experiment kind, a parameter grid, a
//! trial count and a master seed. Every trial draws from a stream seeded by
//! `derive_seed(master, [tag, d, F, s, noise, trial])`, so a cell's numbers do
//! not depend on which other cells share the grid, and running trials in
//! parallel cannot change them. Rows are assembled sequentially in grid
//! order.

mod coherence;
mod config;
mod energy;
mod interference;
mod recovery;
mod result;
mod separation;

pub use coherence::{coherence_tail, union_bound};
pub use config::{
    ExperimentConfig, ExperimentKind, ExperimentOptions, FeatureRule, Grid, CALIBRATED_COHERENCE_CONSTANT,
    CALIBRATED_PHASE_CONSTANT, UNIVERSAL_COHERENCE_CONSTANT,
};
pub use energy::energy_floor;
pub use interference::interference_tail;
pub use recovery::recovery_phase;
pub use result::{Bound, BoundKind, ExperimentResult, Metadata, ResultRow};
pub use separation::{quadratic_separation, separation_sparsity};

use alloc::vec::Vec;

use crate::error::Result;
use crate::sparse::NoiseSpec;

/// Runs the experiment named by `config.kind`.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    match config.kind {
        ExperimentKind::CoherenceTail => coherence_tail(config),
        ExperimentKind::InterferenceTail => interference_tail(config),
        ExperimentKind::RecoveryPhase => recovery_phase(config),
        ExperimentKind::EnergyFloor => energy_floor(config),
        ExperimentKind::QuadraticSeparation => quadratic_separation(config),
    }
}

fn noise_key(noise: &NoiseSpec) -> u64 {
    match *noise {
        NoiseSpec::None => 0,
        NoiseSpec::GaussianAmbient(s) => (1u64 << 62) ^ s.to_bits(),
        NoiseSpec::ScoreBounded(n) => (2u64 << 62) ^ n.to_bits(),
    }
}

#[cfg(feature = "parallel")]
fn map_trials<T: Send>(n: usize, parallel: bool, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn map_trials<T>(n: usize, _parallel: bool, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Sample SD / √n of 0/1 outcomes.
fn rate_with_stderr(hits: &[bool]) -> (f64, f64) {
    let values: Vec<f64> = hits.iter().map(|&h| if h { 1.0 } else { 0.0 }).collect();
    let s = crate::stats::Summary::of(&values);
    (s.mean, s.stderr)
}
