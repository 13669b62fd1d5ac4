use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::kernels::TilePlan;
use crate::readouts::ReadoutKind;
use crate::sparse::NoiseSpec;

/// Universal constant of the union-bound coherence estimate; reported next to
/// empirical rates but never used as a pass/fail threshold.
pub const UNIVERSAL_COHERENCE_CONSTANT: f64 = 6.0;

/// Empirical `median μ · √(d/ln d)` for random codes at `F = d²`, frozen from
/// the calibration run documented in the README (d ∈ {32, 64, 128}).
pub const CALIBRATED_COHERENCE_CONSTANT: f64 = 2.4;

/// Phase-boundary constant `c` for `s = max(1, round(c·d/ln d))` at `F = d²`,
/// frozen from the calibration run documented in the README.
pub const CALIBRATED_PHASE_CONSTANT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ExperimentKind {
    CoherenceTail,
    InterferenceTail,
    RecoveryPhase,
    EnergyFloor,
    QuadraticSeparation,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::CoherenceTail,
        ExperimentKind::InterferenceTail,
        ExperimentKind::RecoveryPhase,
        ExperimentKind::EnergyFloor,
        ExperimentKind::QuadraticSeparation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::CoherenceTail => "coherence-tail",
            ExperimentKind::InterferenceTail => "interference-tail",
            ExperimentKind::RecoveryPhase => "recovery-phase",
            ExperimentKind::EnergyFloor => "energy-floor",
            ExperimentKind::QuadraticSeparation => "quadratic-separation",
        }
    }

    pub(crate) fn tag(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::config("experiment", format!("unknown experiment `{s}`")))
    }
}

/// How `F` is derived from `d`: a literal, `Kd`, `d^2` or `d+K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureRule {
    Fixed(usize),
    Multiple(usize),
    Square,
    Offset(usize),
}

impl FeatureRule {
    pub fn eval(self, d: usize) -> usize {
        match self {
            FeatureRule::Fixed(f) => f,
            FeatureRule::Multiple(k) => k * d,
            FeatureRule::Square => d * d,
            FeatureRule::Offset(k) => d + k,
        }
    }
}

impl fmt::Display for FeatureRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FeatureRule::Fixed(n) => write!(f, "{n}"),
            FeatureRule::Multiple(1) => f.write_str("d"),
            FeatureRule::Multiple(k) => write!(f, "{k}d"),
            FeatureRule::Square => f.write_str("d^2"),
            FeatureRule::Offset(k) => write!(f, "d+{k}"),
        }
    }
}

impl FromStr for FeatureRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::config("grid.F", format!("cannot parse F-rule `{s}`"));
        if t == "d^2" || t == "d*d" || t == "d²" {
            return Ok(FeatureRule::Square);
        }
        if t == "d" {
            return Ok(FeatureRule::Multiple(1));
        }
        if let Some(rest) = t.strip_prefix("d+") {
            return rest.parse().map(FeatureRule::Offset).map_err(|_| bad());
        }
        if let Some(k) = t.strip_suffix('d') {
            let k = k.strip_suffix('*').unwrap_or(k);
            return k.parse().map(FeatureRule::Multiple).map_err(|_| bad());
        }
        t.parse().map(FeatureRule::Fixed).map_err(|_| bad())
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for FeatureRule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for FeatureRule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = FeatureRule;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an integer or an F-rule such as \"d^2\", \"8d\", \"d+1\"")
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> core::result::Result<FeatureRule, E> {
                Ok(FeatureRule::Fixed(v as usize))
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> core::result::Result<FeatureRule, E> {
                if v < 0 {
                    return Err(E::custom("F must be positive"));
                }
                Ok(FeatureRule::Fixed(v as usize))
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> core::result::Result<FeatureRule, E> {
                v.parse().map_err(|e: Error| E::custom(alloc::string::ToString::to_string(&e)))
            }
        }
        d.deserialize_any(V)
    }
}

/// Parameter grid. `s` doubles as the interferer count `m` for
/// interference tails; `delta` is the tolerated failure rate used for `ŝ*`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Grid {
    pub d: Vec<usize>,
    #[cfg_attr(feature = "serde", serde(rename = "F"))]
    pub features: Vec<FeatureRule>,
    pub s: Vec<usize>,
    pub noise: Vec<NoiseSpec>,
    pub delta: Vec<f64>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            d: vec![32],
            features: vec![FeatureRule::Square],
            s: vec![1],
            noise: vec![NoiseSpec::None],
            delta: vec![0.01],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExperimentOptions {
    /// Recovery phase: one code per `(d, F)` instead of a fresh code per
    /// trial.
    pub fixed_code: bool,
    /// Energy floor: readouts to evaluate.
    pub readouts: Vec<ReadoutKind>,
    pub coherence_constant: f64,
    pub phase_constant: f64,
    /// Recovery phase: compute `μ` per trial and check the certificate.
    pub certify_trials: bool,
    pub parallel_trials: bool,
    /// Interference tail: thresholds in units of `√(m/d)`.
    pub tail_multipliers: Vec<f64>,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            fixed_code: false,
            readouts: vec![ReadoutKind::Transpose, ReadoutKind::LeastSquares],
            coherence_constant: CALIBRATED_COHERENCE_CONSTANT,
            phase_constant: CALIBRATED_PHASE_CONSTANT,
            certify_trials: false,
            parallel_trials: false,
            tail_multipliers: vec![1.0, 2.0, 3.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub grid: Grid,
    pub trials: usize,
    pub seed: u64,
    pub plan: TilePlan,
    pub options: ExperimentOptions,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            grid: Grid::default(),
            trials: 100,
            seed: 0,
            plan: TilePlan::default(),
            options: ExperimentOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::config("trials", "trials must be ≥ 1"));
        }
        if self.plan.tile_cols < 1 {
            return Err(Error::config("plan.tile_cols", "tile_cols must be ≥ 1"));
        }
        let g = &self.grid;
        if g.d.is_empty() {
            return Err(Error::config("grid.d", "at least one d is required"));
        }
        if let Some(d) = g.d.iter().find(|&&d| d < 2) {
            return Err(Error::config("grid.d", format!("d = {d} must be ≥ 2")));
        }
        let uses_features = !matches!(
            self.kind,
            ExperimentKind::InterferenceTail | ExperimentKind::QuadraticSeparation
        );
        if uses_features {
            if g.features.is_empty() {
                return Err(Error::config("grid.F", "at least one F-rule is required"));
            }
            let min_f = if self.kind == ExperimentKind::CoherenceTail { 2 } else { 1 };
            for &d in &g.d {
                for rule in &g.features {
                    if rule.eval(d) < min_f {
                        return Err(Error::config(
                            "grid.F",
                            format!("F-rule `{rule}` gives F = {} < {min_f} at d = {d}", rule.eval(d)),
                        ));
                    }
                }
            }
        }
        let uses_s = matches!(
            self.kind,
            ExperimentKind::InterferenceTail | ExperimentKind::RecoveryPhase | ExperimentKind::EnergyFloor
        );
        if uses_s && g.s.is_empty() {
            return Err(Error::config("grid.s", "at least one s is required"));
        }
        if self.kind == ExperimentKind::RecoveryPhase {
            if g.noise.is_empty() {
                return Err(Error::config("grid.noise", "at least one noise level is required"));
            }
            for &d in &g.d {
                for rule in &g.features {
                    if let Some(s) = g.s.iter().find(|&&s| s > rule.eval(d)) {
                        return Err(Error::config(
                            "grid.s",
                            format!("s = {s} exceeds F = {} at d = {d}", rule.eval(d)),
                        ));
                    }
                }
            }
        }
        for n in &g.noise {
            n.validate().map_err(|_| Error::config("grid.noise", format!("invalid noise `{n}`")))?;
        }
        if g.delta.is_empty() {
            return Err(Error::config("grid.delta", "at least one delta is required"));
        }
        if let Some(dl) = g.delta.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::config("grid.delta", format!("delta = {dl} must lie in (0, 1)")));
        }
        let o = &self.options;
        if !(o.coherence_constant > 0.0) {
            return Err(Error::config("options.coherence_constant", "must be > 0"));
        }
        if !(o.phase_constant > 0.0) {
            return Err(Error::config("options.phase_constant", "must be > 0"));
        }
        if self.kind == ExperimentKind::EnergyFloor && o.readouts.is_empty() {
            return Err(Error::config("options.readouts", "at least one readout is required"));
        }
        if o.readouts.contains(&ReadoutKind::External) {
            return Err(Error::config("options.readouts", "external readouts cannot be generated"));
        }
        if o.tail_multipliers.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::config("options.tail_multipliers", "multipliers must be > 0"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_rules_parse_and_print() {
        for (text, rule, at8) in [
            ("d^2", FeatureRule::Square, 64),
            ("8d", FeatureRule::Multiple(8), 64),
            ("d", FeatureRule::Multiple(1), 8),
            ("d+1", FeatureRule::Offset(1), 9),
            ("1024", FeatureRule::Fixed(1024), 1024),
        ] {
            let parsed: FeatureRule = text.parse().unwrap();
            assert_eq!(parsed, rule);
            assert_eq!(parsed.eval(8), at8);
            assert_eq!(parsed.to_string(), text);
        }
        assert!("d^3".parse::<FeatureRule>().is_err());
        assert!("xd".parse::<FeatureRule>().is_err());
    }

    #[test]
    fn zero_trials_rejected_with_message() {
        let mut c = ExperimentConfig::new(ExperimentKind::CoherenceTail);
        c.trials = 0;
        let e = c.validate().unwrap_err();
        assert_eq!(
            e,
            Error::InvalidConfig {
                field: "trials".into(),
                reason: "trials must be ≥ 1".into()
            }
        );
    }

    #[test]
    fn grid_fields_named_in_errors() {
        let mut c = ExperimentConfig::new(ExperimentKind::RecoveryPhase);
        c.grid.d = vec![1];
        assert!(matches!(c.validate(), Err(Error::InvalidConfig { field, .. }) if field == "grid.d"));
        let mut c = ExperimentConfig::new(ExperimentKind::RecoveryPhase);
        c.grid.s = vec![5000];
        assert!(matches!(c.validate(), Err(Error::InvalidConfig { field, .. }) if field == "grid.s"));
        let mut c = ExperimentConfig::new(ExperimentKind::RecoveryPhase);
        c.grid.delta = vec![1.5];
        assert!(matches!(c.validate(), Err(Error::InvalidConfig { field, .. }) if field == "grid.delta"));
        let mut c = ExperimentConfig::new(ExperimentKind::CoherenceTail);
        c.grid.features = vec![FeatureRule::Fixed(1)];
        assert!(matches!(c.validate(), Err(Error::InvalidConfig { field, .. }) if field == "grid.F"));
    }

    #[test]
    fn kinds_round_trip() {
        for k in ExperimentKind::ALL {
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        }
    }
}
