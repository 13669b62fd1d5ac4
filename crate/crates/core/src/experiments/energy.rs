use alloc::vec::Vec;

use super::config::ExperimentConfig;
use super::map_trials;
use super::result::{Bound, ExperimentResult};
use crate::codes::{random_unit_code, Code};
use crate::error::Result;
use crate::readouts::{rescale_to_unit_diagonal, Readout, ReadoutKind, DEFAULT_EPS_DIAG};
use crate::rng::{derive_seed, rng_from_seed};
use crate::sparse::{energy_closed_form, energy_floor_bound, linear_energy, SparseState};

pub(crate) fn readout_tag(kind: ReadoutKind) -> u64 {
    match kind {
        ReadoutKind::Transpose => 1,
        ReadoutKind::LeastSquares => 2,
        ReadoutKind::External => 3,
    }
}

pub(crate) fn readout_name(kind: ReadoutKind) -> &'static str {
    match kind {
        ReadoutKind::Transpose => "transpose",
        ReadoutKind::LeastSquares => "least-squares",
        ReadoutKind::External => "external",
    }
}

/// Builds the unit-diagonal readout of the given kind for `code`.
pub(crate) fn unit_readout(kind: ReadoutKind, code: &Code) -> Result<Readout> {
    match kind {
        ReadoutKind::Transpose => Ok(Readout::transpose(code)),
        ReadoutKind::LeastSquares => rescale_to_unit_diagonal(&Readout::least_squares(code)?, code, DEFAULT_EPS_DIAG),
        ReadoutKind::External => Err(crate::error::Error::config(
            "options.readouts",
            "external readouts cannot be generated",
        )),
    }
}

/// Monte Carlo `‖Ab‖²/F` over Bernoulli(`s/F`) states.
pub(crate) fn energy_samples(readout: &Readout, code: &Code, s: f64, trials: usize, seed: u64, parallel: bool) -> Result<(f64, f64)> {
    let f = code.features();
    let states = map_trials(trials, parallel, |t| {
        let mut rng = rng_from_seed(derive_seed(seed, &[t as u64]));
        SparseState::random_bernoulli(f, s, &mut rng)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let e = linear_energy(readout, code, &states)?;
    Ok((e.mean, e.stderr))
}

/// Average linear cross-talk energy per `(d, F, s, readout)` on one random
/// code per cell, with the per-feature floor `s(F−d)/(2dF)` and the exact
/// Bernoulli expectation for comparison.
pub fn energy_floor(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let tag = config.kind.tag();
    let mut out = ExperimentResult::new(config.kind, config.seed, config.trials);
    out.note("states are i.i.d. Bernoulli(s/F); readouts are rescaled to unit diagonal");
    out.note("the floor is stated for expected sparsity s <= F/2");
    for &d in &config.grid.d {
        for rule in &config.grid.features {
            let f = rule.eval(d);
            for &s in &config.grid.s {
                if s > f {
                    continue;
                }
                let code = random_unit_code(d, f, derive_seed(config.seed, &[tag, d as u64, f as u64, s as u64]))?;
                for &kind in &config.options.readouts {
                    let readout = unit_readout(kind, &code)?;
                    let seed = derive_seed(config.seed, &[tag, d as u64, f as u64, s as u64, readout_tag(kind)]);
                    let (mean, se) = energy_samples(&readout, &code, s as f64, config.trials, seed, config.options.parallel_trials)?;
                    let floor = energy_floor_bound(d, f, s as f64);
                    let bound = if 2 * s <= f {
                        Bound::theorem("energy_floor", floor, mean + 3.0 * se >= floor)
                    } else {
                        Bound::reference("energy_floor", floor, mean + 3.0 * se >= floor)
                    };
                    let stat = alloc::format!("energy_mean_{}", readout_name(kind));
                    out.push(d, f, Some(s), None, stat, mean, Some(se), Some(bound), config.trials);

                    let exact = energy_closed_form(&readout, &code, s as f64 / f as f64, &config.plan)? / f as f64;
                    let stat = alloc::format!("energy_exact_{}", readout_name(kind));
                    let agrees = (mean - exact).abs() <= 4.0 * se + 1e-12;
                    out.push(
                        d,
                        f,
                        Some(s),
                        None,
                        stat,
                        exact,
                        None,
                        Some(Bound::reference("monte_carlo_mean", mean, agrees)),
                        config.trials,
                    );
                }
            }
        }
    }
    Ok(out)
}
