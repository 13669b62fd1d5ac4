use alloc::vec::Vec;

use super::config::{ExperimentConfig, UNIVERSAL_COHERENCE_CONSTANT};
use super::result::{Bound, ExperimentResult};
use super::{map_trials, rate_with_stderr};
use crate::codes::{certify, random_unit_code, welch_pair_floor};
use crate::error::Result;
use crate::rng::derive_seed;
use crate::stats::{median, Summary};

/// `min(1, 2·C(F,2)·exp(−(d−1)t²/2))`, the union bound on `Pr{μ > t}` for
/// `F` independent random unit vectors in dimension `d`.
pub fn union_bound(d: usize, f: usize, t: f64) -> f64 {
    let pairs = f as f64 * (f as f64 - 1.0) / 2.0;
    let log_bound = libm::log(2.0 * pairs) - (d as f64 - 1.0) * t * t / 2.0;
    if log_bound >= 0.0 {
        1.0
    } else {
        libm::exp(log_bound)
    }
}

/// Coherence of fresh random codes per `(d, F)`: median and mean `μ`, the
/// normalized constant `median·√(d/ln d)`, exceedance rates at the universal
/// and calibrated levels, and the Welch pair floor on every trial.
pub fn coherence_tail(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let tag = config.kind.tag();
    let mut out = ExperimentResult::new(config.kind, config.seed, config.trials);
    out.note("coherence of independent uniform unit vectors; one fresh code per trial");
    for &d in &config.grid.d {
        for rule in &config.grid.features {
            let f = rule.eval(d);
            let seeds: Vec<u64> = (0..config.trials)
                .map(|t| derive_seed(config.seed, &[tag, d as u64, f as u64, t as u64]))
                .collect();
            let mus = map_trials(config.trials, config.options.parallel_trials, |t| {
                let code = random_unit_code(d, f, seeds[t])?;
                certify(&code, &config.plan).map(|c| c.coherence)
            })
            .into_iter()
            .collect::<Result<Vec<f64>>>()?;
            let n = mus.len();
            let summary = Summary::of(&mus);
            let med = median(&mus);
            // asymptotic SE of a sample median, √(π/2)·SD/√n
            let med_se = 1.253_314_137_315_500_3 * summary.stderr;
            let scale = libm::sqrt(libm::log(d as f64) / d as f64);

            out.push(d, f, None, None, "median_coherence", med, Some(med_se), None, n);
            out.push(d, f, None, None, "mean_coherence", summary.mean, Some(summary.stderr), None, n);
            let floor = welch_pair_floor(d, f);
            out.push(
                d,
                f,
                None,
                None,
                "min_coherence",
                summary.min,
                None,
                Some(Bound::theorem("welch_pair_floor", floor, summary.min >= floor - 1e-9)),
                n,
            );
            let constant = if scale > 0.0 { med / scale } else { f64::NAN };
            out.push(
                d,
                f,
                None,
                None,
                "coherence_constant",
                constant,
                Some(med_se / scale),
                None,
                n,
            );

            let t_universal = UNIVERSAL_COHERENCE_CONSTANT * scale;
            let (rate, se) = rate_with_stderr(&mus.iter().map(|&m| m > t_universal).collect::<Vec<_>>());
            let bound = union_bound(d, f, t_universal);
            out.push(
                d,
                f,
                None,
                None,
                "exceedance_universal_level",
                rate,
                Some(se),
                Some(Bound::theorem("union_bound", bound, rate <= bound + 3.0 * se)),
                n,
            );

            let t_cal = config.options.coherence_constant * scale;
            let (rate, se) = rate_with_stderr(&mus.iter().map(|&m| m > t_cal).collect::<Vec<_>>());
            let bound = union_bound(d, f, t_cal);
            out.push(
                d,
                f,
                None,
                None,
                "exceedance_calibrated_level",
                rate,
                Some(se),
                Some(Bound::theorem("union_bound", bound, rate <= bound + 3.0 * se)),
                n,
            );
        }
    }
    Ok(out)
}
