//! CSV and JSON renderings of experiment results.

use sclab_core::experiments::{ExperimentResult, ResultRow};

pub const CSV_COLUMNS: [&str; 13] = [
    "experiment",
    "d",
    "F",
    "s",
    "noise",
    "statistic",
    "value",
    "stderr",
    "bound",
    "bound_name",
    "satisfied",
    "trials",
    "seed",
];

/// Shortest round-trip text; scientific notation for very small or large
/// magnitudes.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_record(row: &ResultRow) -> [String; 13] {
    [
        row.experiment.to_string(),
        row.d.to_string(),
        row.features.to_string(),
        opt(row.s),
        opt(row.noise),
        row.statistic.clone(),
        fmt_f64(row.value),
        row.stderr.map(fmt_f64).unwrap_or_default(),
        row.bound.as_ref().map(|b| fmt_f64(b.value)).unwrap_or_default(),
        row.bound.as_ref().map(|b| b.name.to_string()).unwrap_or_default(),
        opt(row.bound.as_ref().map(|b| b.satisfied)),
        row.trials.to_string(),
        row.seed.to_string(),
    ]
}

pub fn to_csv(result: &ExperimentResult) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for row in &result.rows {
        w.write_record(csv_record(row)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub fn to_json(result: &ExperimentResult) -> String {
    let mut s = serde_json::to_string_pretty(result).expect("result serializes");
    s.push('\n');
    s
}
