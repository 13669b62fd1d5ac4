use alloc::vec::Vec;

use super::config::ExperimentConfig;
use super::energy::energy_samples;
use super::result::{Bound, ExperimentResult};
use super::{map_trials, rate_with_stderr};
use crate::codes::random_unit_code;
use crate::error::Result;
use crate::readouts::Readout;
use crate::rng::derive_seed;
use crate::sparse::{energy_floor_bound, NoiseSpec};

use super::recovery::recovery_trial;

/// `max(1, round(c·d/ln d))`.
pub fn separation_sparsity(d: usize, c: f64) -> usize {
    let raw = c * d as f64 / libm::log(d as f64);
    (libm::round(raw) as usize).max(1)
}

/// Paired report per `d` at `F = d²`: noiseless threshold success at the
/// calibrated sparsity, and transpose-readout linear energy against its
/// floor at the same expected sparsity.
pub fn quadratic_separation(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let tag = config.kind.tag();
    let c = config.options.phase_constant;
    let mut out = ExperimentResult::new(config.kind, config.seed, config.trials);
    out.note("F = d^2; s = max(1, round(c d / ln d)) with the calibrated phase constant");
    out.note("threshold half uses uniform s-supports, energy half uses Bernoulli(s/F) states: not a pointwise comparison");
    for &d in &config.grid.d {
        let f = d * d;
        let s = separation_sparsity(d, c);
        let n = config.trials;
        if 2 * s > f {
            out.push(d, f, Some(s), None, "skipped", f64::NAN, None, None, 0);
            continue;
        }
        out.push(d, f, Some(s), None, "sparsity", s as f64, None, None, n);

        let outcomes = map_trials(n, config.options.parallel_trials, |t| {
            let seed = derive_seed(config.seed, &[tag, d as u64, 1, t as u64]);
            recovery_trial(d, f, s, NoiseSpec::None, None, seed, None).map(|o| o.exact)
        })
        .into_iter()
        .collect::<Result<Vec<bool>>>()?;
        let (rate, se) = rate_with_stderr(&outcomes);
        out.push(
            d,
            f,
            Some(s),
            Some(NoiseSpec::None),
            "threshold_success_rate",
            rate,
            Some(se),
            Some(Bound::reference("target_success", 0.99, rate >= 0.99)),
            n,
        );

        let code = random_unit_code(d, f, derive_seed(config.seed, &[tag, d as u64, 2]))?;
        let readout = Readout::transpose(&code);
        let seed = derive_seed(config.seed, &[tag, d as u64, 3]);
        let (mean, se) = energy_samples(&readout, &code, s as f64, n, seed, config.options.parallel_trials)?;
        let floor = energy_floor_bound(d, f, s as f64);
        out.push(
            d,
            f,
            Some(s),
            None,
            "linear_energy_mean",
            mean,
            Some(se),
            Some(Bound::theorem("energy_floor", floor, mean + 3.0 * se >= floor)),
            n,
        );
    }
    Ok(out)
}
