//! TOML run configuration.
//!
//! ```toml
//! experiment = "recovery-phase"
//! trials = 500
//! seed = 7
//!
//! [grid]
//! d = [32, 64]
//! F = ["d^2"]
//! s = [1, 2, 3]
//! noise = ["none", "score:0.05"]
//! delta = [0.01]
//!
//! [plan]
//! tile_cols = 256
//!
//! [options]
//! fixed_code = false
//!
//! [output]
//! dir = "out/phase"
//! plots = true
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sclab_core::experiments::{ExperimentConfig, ExperimentKind, FeatureRule};
use sclab_core::kernels::TilePlan;
use sclab_core::readouts::ReadoutKind;
use sclab_core::sparse::NoiseSpec;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(#[from] sclab_core::Error),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: ExperimentKind,
    trials: Option<usize>,
    seed: Option<u64>,
    #[serde(default)]
    grid: RawGrid,
    plan: Option<RawPlan>,
    #[serde(default)]
    options: RawOptions,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    pub d: Option<Vec<usize>>,
    #[serde(rename = "F")]
    pub features: Option<Vec<FeatureRule>>,
    pub s: Option<Vec<usize>>,
    pub noise: Option<Vec<NoiseSpec>>,
    pub delta: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlan {
    tile_cols: Option<usize>,
    parallel_tiles: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOptions {
    pub fixed_code: Option<bool>,
    pub readouts: Option<Vec<ReadoutKind>>,
    pub coherence_constant: Option<f64>,
    pub phase_constant: Option<f64>,
    pub certify_trials: Option<bool>,
    pub parallel_trials: Option<bool>,
    pub tail_multipliers: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    plots: Option<bool>,
}

/// A parsed run file: the experiment plus where and how to write it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub output_dir: Option<PathBuf>,
    pub plots: bool,
}

impl RunConfig {
    pub fn defaults(kind: ExperimentKind) -> RunConfig {
        RunConfig {
            experiment: ExperimentConfig::new(kind),
            output_dir: None,
            plots: true,
        }
    }
}

pub fn apply_grid(cfg: &mut ExperimentConfig, grid: RawGrid) {
    let g = &mut cfg.grid;
    if let Some(v) = grid.d {
        g.d = v;
    }
    if let Some(v) = grid.features {
        g.features = v;
    }
    if let Some(v) = grid.s {
        g.s = v;
    }
    if let Some(v) = grid.noise {
        g.noise = v;
    }
    if let Some(v) = grid.delta {
        g.delta = v;
    }
}

pub fn apply_options(cfg: &mut ExperimentConfig, opts: RawOptions) {
    let o = &mut cfg.options;
    if let Some(v) = opts.fixed_code {
        o.fixed_code = v;
    }
    if let Some(v) = opts.readouts {
        o.readouts = v;
    }
    if let Some(v) = opts.coherence_constant {
        o.coherence_constant = v;
    }
    if let Some(v) = opts.phase_constant {
        o.phase_constant = v;
    }
    if let Some(v) = opts.certify_trials {
        o.certify_trials = v;
    }
    if let Some(v) = opts.parallel_trials {
        o.parallel_trials = v;
    }
    if let Some(v) = opts.tail_multipliers {
        o.tail_multipliers = v;
    }
}

/// Parses and validates a config document. Errors name the offending field.
pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let mut run = RunConfig::defaults(raw.experiment);
    let cfg = &mut run.experiment;
    if let Some(t) = raw.trials {
        cfg.trials = t;
    }
    if let Some(s) = raw.seed {
        cfg.seed = s;
    }
    if let Some(p) = raw.plan {
        cfg.plan = TilePlan {
            tile_cols: p.tile_cols.unwrap_or(cfg.plan.tile_cols),
            parallel_tiles: p.parallel_tiles.unwrap_or(cfg.plan.parallel_tiles),
        };
    }
    apply_grid(cfg, raw.grid);
    apply_options(cfg, raw.options);
    run.output_dir = raw.output.dir;
    run.plots = raw.output.plots.unwrap_or(true);
    cfg.validate()?;
    Ok(run)
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_document() {
        let run = parse(
            r#"
experiment = "recovery-phase"
trials = 12
seed = 3
[grid]
d = [16, 32]
F = ["d^2", "8d", 100]
s = [1, 2]
noise = ["none", "score:0.1", "gaussian:0.01"]
[options]
fixed_code = true
readouts = ["least-squares"]
[output]
dir = "x"
plots = false
"#,
        )
        .unwrap();
        let c = &run.experiment;
        assert_eq!(c.kind, ExperimentKind::RecoveryPhase);
        assert_eq!((c.trials, c.seed), (12, 3));
        assert_eq!(
            c.grid.features,
            vec![FeatureRule::Square, FeatureRule::Multiple(8), FeatureRule::Fixed(100)]
        );
        assert_eq!(c.grid.noise[1], NoiseSpec::ScoreBounded(0.1));
        assert!(c.options.fixed_code);
        assert_eq!(c.options.readouts, vec![ReadoutKind::LeastSquares]);
        assert_eq!(run.output_dir.as_deref(), Some(Path::new("x")));
        assert!(!run.plots);
    }

    #[test]
    fn errors_name_the_field() {
        let e = parse("experiment = \"coherence-tail\"\ntrials = 0\n").unwrap_err();
        assert!(e.to_string().contains("trials must be ≥ 1"), "{e}");
        let e = parse("experiment = \"coherence-tail\"\ntirals = 5\n").unwrap_err();
        assert!(e.to_string().contains("tirals"), "{e}");
        let e = parse("experiment = \"coherence-tail\"\n[grid]\nF = [\"d^3\"]\n").unwrap_err();
        assert!(e.to_string().contains("F"), "{e}");
        let e = parse("experiment = \"recovery-phase\"\n[grid]\nnoise = [\"loud\"]\n").unwrap_err();
        assert!(e.to_string().contains("noise"), "{e}");
        let e = parse("experiment = \"nope\"\n").unwrap_err();
        assert!(e.to_string().contains("experiment"), "{e}");
    }
}
