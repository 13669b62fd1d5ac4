use alloc::vec;
use alloc::vec::Vec;

use super::config::ExperimentConfig;
use super::result::{Bound, ExperimentResult};
use super::{map_trials, rate_with_stderr};
use crate::error::Result;
use crate::kernels::dot;
use crate::rng::{derive_seed, fill_unit_vector, rng_from_seed};
use crate::stats::Summary;

/// One draw of `Σ_{j≤m} ⟨u, u_j⟩` for independent uniform unit vectors.
pub(crate) fn interference_sample(d: usize, m: usize, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    let mut u = vec![0.0; d];
    fill_unit_vector(&mut rng, &mut u);
    let mut other = vec![0.0; d];
    let mut sum = 0.0;
    for _ in 0..m {
        fill_unit_vector(&mut rng, &mut other);
        sum += dot(&u, &other);
    }
    sum
}

/// Interference sums per `(d, m)` with `m` taken from the `s` grid: sample
/// variance against `m/d`, and exceedance of `k·√(m/d)` for each configured
/// multiplier `k` against the sub-Gaussian tail `2·exp(−k²/2)`.
pub fn interference_tail(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let tag = config.kind.tag();
    let mut out = ExperimentResult::new(config.kind, config.seed, config.trials);
    out.note("m is read from the s grid; F is reported as m + 1 vectors per trial");
    out.note("tail reference 2exp(-k^2/2) uses the sphere's 1/d variance proxy per term");
    for &d in &config.grid.d {
        for &m in &config.grid.s {
            let f = m + 1;
            let n = config.trials;
            let sums = map_trials(n, config.options.parallel_trials, |t| {
                interference_sample(d, m, derive_seed(config.seed, &[tag, d as u64, m as u64, t as u64]))
            });
            let target = m as f64 / d as f64;
            let squares: Vec<f64> = sums.iter().map(|x| x * x).collect();
            // the mean is zero by symmetry, so E[S²] is the variance
            let sq = Summary::of(&squares);
            let within = if m == 0 {
                sq.max == 0.0
            } else {
                sq.mean >= 0.8 * target && sq.mean <= 1.2 * target
            };
            out.push(
                d,
                f,
                Some(m),
                None,
                "variance",
                sq.mean,
                Some(sq.stderr),
                Some(Bound::reference("m_over_d", target, within)),
                n,
            );
            let abs_max = sums.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            out.push(d, f, Some(m), None, "max_abs_sum", abs_max, None, None, n);
            if m == 0 {
                continue;
            }
            let mut multipliers = config.options.tail_multipliers.clone();
            multipliers.sort_by(f64::total_cmp);
            let mut previous = f64::INFINITY;
            let mut monotone = true;
            for k in multipliers {
                let t = k * libm::sqrt(target);
                let (rate, se) = rate_with_stderr(&sums.iter().map(|x| x.abs() > t).collect::<Vec<_>>());
                monotone &= rate <= previous;
                previous = rate;
                let bound = (2.0 * libm::exp(-k * k / 2.0)).min(1.0);
                out.push(
                    d,
                    f,
                    Some(m),
                    None,
                    alloc::format!("exceedance_k={k}"),
                    rate,
                    Some(se),
                    Some(Bound::theorem("subgaussian_tail", bound, rate <= bound + 3.0 * se)),
                    n,
                );
            }
            out.push(
                d,
                f,
                Some(m),
                None,
                "tail_monotone",
                if monotone { 1.0 } else { 0.0 },
                None,
                Some(Bound::reference("monotone_in_t", 1.0, monotone)),
                n,
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ExperimentKind;

    #[test]
    fn zero_interferers_sum_to_zero() {
        let mut c = ExperimentConfig::new(ExperimentKind::InterferenceTail);
        c.grid.d = vec![16];
        c.grid.s = vec![0];
        c.trials = 50;
        let r = interference_tail(&c).unwrap();
        assert_eq!(r.find("max_abs_sum").next().unwrap().value, 0.0);
        assert_eq!(r.find("variance").next().unwrap().value, 0.0);
    }

    #[test]
    fn single_interferer_is_a_pair_inner_product() {
        for seed in 0..5 {
            let x = interference_sample(8, 1, seed);
            assert!(x.abs() <= 1.0 + 1e-15);
        }
    }
}
