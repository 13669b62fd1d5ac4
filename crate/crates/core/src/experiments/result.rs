use alloc::string::String;
use alloc::vec::Vec;

use super::config::ExperimentKind;
use crate::sparse::NoiseSpec;

/// Whether a bound is a proved inequality (a violation is a defect) or a
/// statistical reference such as a calibrated target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum BoundKind {
    Theorem,
    Reference,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Bound {
    pub value: f64,
    pub name: &'static str,
    pub kind: BoundKind,
    pub satisfied: bool,
}

impl Bound {
    pub fn theorem(name: &'static str, value: f64, satisfied: bool) -> Bound {
        Bound {
            value,
            name,
            kind: BoundKind::Theorem,
            satisfied,
        }
    }

    pub fn reference(name: &'static str, value: f64, satisfied: bool) -> Bound {
        Bound {
            value,
            name,
            kind: BoundKind::Reference,
            satisfied,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ResultRow {
    pub experiment: ExperimentKind,
    pub d: usize,
    #[cfg_attr(feature = "serde", serde(rename = "F"))]
    pub features: usize,
    pub s: Option<usize>,
    #[cfg_attr(feature = "serde", serde(serialize_with = "ser_noise"))]
    pub noise: Option<NoiseSpec>,
    pub statistic: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub bound: Option<Bound>,
    pub trials: usize,
    pub seed: u64,
}

#[cfg(feature = "serde")]
fn ser_noise<S: serde::Serializer>(n: &Option<NoiseSpec>, s: S) -> core::result::Result<S::Ok, S::Error> {
    match n {
        Some(n) => s.collect_str(n),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Metadata {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub trials: usize,
    pub version: &'static str,
    pub log: &'static str,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExperimentResult {
    pub metadata: Metadata,
    pub rows: Vec<ResultRow>,
}

impl ExperimentResult {
    pub(crate) fn new(kind: ExperimentKind, seed: u64, trials: usize) -> Self {
        ExperimentResult {
            metadata: Metadata {
                experiment: kind,
                seed,
                trials,
                version: crate::VERSION,
                log: "natural",
                notes: Vec::new(),
            },
            rows: Vec::new(),
        }
    }

    pub(crate) fn note(&mut self, text: &str) {
        self.metadata.notes.push(text.into());
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn push(
        &mut self,
        d: usize,
        features: usize,
        s: Option<usize>,
        noise: Option<NoiseSpec>,
        statistic: impl Into<String>,
        value: f64,
        stderr: Option<f64>,
        bound: Option<Bound>,
        trials: usize,
    ) {
        self.rows.push(ResultRow {
            experiment: self.metadata.experiment,
            d,
            features,
            s,
            noise,
            statistic: statistic.into(),
            value,
            stderr,
            bound,
            trials,
            seed: self.metadata.seed,
        });
    }

    /// Rows whose proved bound is reported as violated.
    pub fn violations(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| {
            r.bound
                .as_ref()
                .is_some_and(|b| b.kind == BoundKind::Theorem && !b.satisfied)
        })
    }

    pub fn find(&self, statistic: &str) -> impl Iterator<Item = &ResultRow> {
        let statistic = String::from(statistic);
        self.rows.iter().filter(move |r| r.statistic == statistic)
    }
}
