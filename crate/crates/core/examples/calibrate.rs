//! Calibration run for the two empirical constants at `F = d²`.
//!
//! Prints median coherence times `√(d/ln d)` and noiseless recovery success
//! for small `s`, from which the frozen constants were read off.
//!
//! ```text
//! cargo run --release -p sclab-core --example calibrate
//! ```

use sclab_core::experiments::{run, ExperimentConfig, ExperimentKind, FeatureRule};

fn main() -> Result<(), sclab_core::Error> {
    let seed = 20_240_601;
    for (d, trials) in [(32usize, 100usize), (64, 50), (128, 12)] {
        let mut c = ExperimentConfig::new(ExperimentKind::CoherenceTail);
        c.grid.d = vec![d];
        c.grid.features = vec![FeatureRule::Square];
        c.trials = trials;
        c.seed = seed;
        let r = run(&c)?;
        for row in r.find("coherence_constant").chain(r.find("median_coherence")) {
            println!("coherence d={d} trials={trials} {}={:.4}", row.statistic, row.value);
        }
    }
    for d in [32usize, 64, 128] {
        let mut c = ExperimentConfig::new(ExperimentKind::RecoveryPhase);
        c.grid.d = vec![d];
        c.grid.features = vec![FeatureRule::Square];
        c.grid.s = vec![1, 2, 3, 4];
        c.trials = 2000;
        c.seed = seed;
        let r = run(&c)?;
        for row in r.find("success_rate") {
            println!(
                "recovery d={d} s={} success={:.4} se={:.4}",
                row.s.unwrap_or(0),
                row.value,
                row.stderr.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
