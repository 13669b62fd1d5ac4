//! The `sclab` command line. Exit codes: 0 success, 1 usage or input error,
//! 2 a proved floor reported as violated (a defect, never a math outcome).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sclab_core::codes::{
    basis_union_code, certify, random_unit_code, tight_frame_code, Code, CodeCertificate, TightFrameOptions,
};
use sclab_core::experiments::{self, ExperimentKind, ExperimentResult, FeatureRule};
use sclab_core::kernels::TilePlan;
use sclab_core::readouts::{
    crosstalk, delta_floor_check, empirical_delta, rescale_to_unit_diagonal, CrosstalkReport, DeltaFloorCheck, Readout,
    ReadoutKind, DEFAULT_EPS_DIAG,
};
use sclab_core::scales::{hierarchy_report, ScaleParams, ScaleReport, Tagged};
use sclab_core::sparse::{max_certified_sparsity, NoiseSpec};

use crate::codefile;
use crate::config::{self, RawGrid, RawOptions, RunConfig};
use crate::manifest::{path_text, FileDigest, RunManifest};
use crate::output;
use crate::svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Violation(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Violation(_) => EXIT_VIOLATION,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

type CliResult = Result<(), CliError>;

#[derive(Debug, Parser)]
#[command(name = "sclab", version, about = "Welch floors, threshold recovery and capacity scales for features in superposition")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cross-talk of a readout against the Welch floors.
    WelchCheck(WelchArgs),
    /// Run an experiment described by a TOML config.
    Experiment(ExperimentArgs),
    /// Coherence of random codes against union-bound levels.
    CoherenceTail(KindArgs),
    /// Interference sums of random unit vectors.
    InterferenceTail(KindArgs),
    /// Exact threshold-recovery phase diagram.
    RecoveryPhase(KindArgs),
    /// Average linear cross-talk energy against its floor.
    EnergyFloor(KindArgs),
    /// Threshold success and linear energy side by side at F = d².
    QuadraticSeparation(KindArgs),
    /// Reference capacity scales with provenance tags.
    Scales(ScalesArgs),
    /// Write a code (and optionally a readout) file.
    GenCode(GenCodeArgs),
    /// Print the certificate of a code.
    Certify(CertifyArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Code file (SCLB).
    #[arg(long, value_name = "PATH")]
    code: Option<PathBuf>,
    /// Random unit code: d=.. F=.. [seed=..]
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    random: Option<Vec<String>>,
    /// Unit-norm tight frame: d=.. F=.. [seed=..] [tol=..] [max_iters=..]
    #[arg(long = "tight-frame", num_args = 1.., value_name = "KEY=VALUE")]
    tight_frame: Option<Vec<String>>,
    /// Union of k orthonormal bases: d=.. k=.. [seed=..]
    #[arg(long = "basis-union", num_args = 1.., value_name = "KEY=VALUE")]
    basis_union: Option<Vec<String>>,
    /// Identity code: d=..
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    identity: Option<Vec<String>>,
}

#[derive(Debug, Args)]
struct ReadoutArgs {
    /// Readout built from the code: transpose or least-squares.
    #[arg(long, default_value = "transpose", conflicts_with = "readout_file")]
    readout: String,
    /// Readout file (SCLR) for the code.
    #[arg(long, value_name = "PATH")]
    readout_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct WelchArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    readout: ReadoutArgs,
    /// Columns per tile in streamed products.
    #[arg(long, default_value_t = 256)]
    tile: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides the config, default ./out.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long)]
    no_plots: bool,
}

#[derive(Debug, Args)]
struct KindArgs {
    /// Start from a config file of the same kind; flags override it.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Comma-separated ambient dimensions.
    #[arg(long)]
    d: Option<String>,
    /// Comma-separated feature counts or rules such as d^2, 8d, d+1.
    #[arg(long = "F")]
    features: Option<String>,
    /// Comma-separated sparsities (interferer counts for interference-tail).
    #[arg(long)]
    s: Option<String>,
    /// Comma-separated noise models: none, gaussian:SIGMA, score:NU.
    #[arg(long)]
    noise: Option<String>,
    /// Comma-separated tolerated failure rates for s*.
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tile: Option<usize>,
    /// Comma-separated readouts: transpose, least-squares.
    #[arg(long)]
    readouts: Option<String>,
    #[arg(long)]
    coherence_constant: Option<f64>,
    #[arg(long)]
    phase_constant: Option<f64>,
    /// Comma-separated tail multipliers k.
    #[arg(long)]
    tail: Option<String>,
    #[arg(long)]
    fixed_code: bool,
    #[arg(long)]
    certify_trials: bool,
    #[arg(long)]
    parallel: bool,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long)]
    no_plots: bool,
}

#[derive(Debug, Args)]
struct ScalesArgs {
    #[arg(long, default_value_t = 1152.0)]
    d: f64,
    #[arg(long, default_value_t = 0.99, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma: f64,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
    #[arg(long, default_value_t = 1.0)]
    c2: f64,
    #[arg(long = "k-gamma", default_value_t = 1.0)]
    k_gamma: f64,
    #[arg(long = "c-gamma", default_value_t = 1.0)]
    c_gamma: f64,
    /// Observed dictionary size for the F/d and F/d^{3/2} columns.
    #[arg(long = "f-obs")]
    f_obs: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct GenCodeArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Also write the readout of this kind (transpose or least-squares,
    /// rescaled to unit diagonal).
    #[arg(long, requires = "readout_out")]
    readout: Option<String>,
    #[arg(long, value_name = "PATH")]
    readout_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = 256)]
    tile: usize,
    #[arg(long)]
    json: bool,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                EXIT_OK
            } else {
                let _ = write!(err, "{e}");
                EXIT_INPUT
            };
        }
    };
    let result = match cli.command {
        Command::WelchCheck(a) => welch_check(a, out),
        Command::Experiment(a) => experiment(a, out),
        Command::CoherenceTail(a) => kind_command(ExperimentKind::CoherenceTail, a, out),
        Command::InterferenceTail(a) => kind_command(ExperimentKind::InterferenceTail, a, out),
        Command::RecoveryPhase(a) => kind_command(ExperimentKind::RecoveryPhase, a, out),
        Command::EnergyFloor(a) => kind_command(ExperimentKind::EnergyFloor, a, out),
        Command::QuadraticSeparation(a) => kind_command(ExperimentKind::QuadraticSeparation, a, out),
        Command::Scales(a) => scales(a, out),
        Command::GenCode(a) => gen_code(a, out),
        Command::Certify(a) => certify_cmd(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let (CliError::Input(msg) | CliError::Violation(msg)) = &e;
            let _ = writeln!(err, "error: {msg}");
            e.code()
        }
    }
}

fn key_values(flag: &str, tokens: &[String], allowed: &[&str]) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for token in tokens.iter().flat_map(|t| t.split(',')).filter(|t| !t.is_empty()) {
        let (k, v) = token
            .split_once('=')
            .ok_or_else(|| input(format!("--{flag}: expected KEY=VALUE, found `{token}`")))?;
        if !allowed.contains(&k) {
            return Err(input(format!("--{flag}: unknown key `{k}` (expected one of {})", allowed.join(", "))));
        }
        map.insert(k.to_string(), v.to_string());
    }
    Ok(map)
}

fn get<T: std::str::FromStr>(flag: &str, map: &BTreeMap<String, String>, key: &str, default: Option<T>) -> Result<T, CliError> {
    match map.get(key) {
        Some(v) => v
            .parse()
            .map_err(|_| input(format!("--{flag}: cannot parse {key}=`{v}`"))),
        None => default.ok_or_else(|| input(format!("--{flag}: missing {key}=.."))),
    }
}

/// Loads or generates the code; returns it with a one-line description.
fn load_code(src: &SourceArgs) -> Result<(Code, String), CliError> {
    if let Some(path) = &src.code {
        let code = codefile::read_code(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
        return Ok((code, format!("file {}", path.display())));
    }
    if let Some(t) = &src.random {
        let m = key_values("random", t, &["d", "F", "seed"])?;
        let (d, f, seed) = (get("random", &m, "d", None)?, get("random", &m, "F", None)?, get("random", &m, "seed", Some(0u64))?);
        let code = random_unit_code(d, f, seed).map_err(input)?;
        return Ok((code, format!("random d={d} F={f} seed={seed}")));
    }
    if let Some(t) = &src.tight_frame {
        let m = key_values("tight-frame", t, &["d", "F", "seed", "tol", "max_iters"])?;
        let defaults = TightFrameOptions::default();
        let d: usize = get("tight-frame", &m, "d", None)?;
        let f: usize = get("tight-frame", &m, "F", None)?;
        let seed = get("tight-frame", &m, "seed", Some(0u64))?;
        let opts = TightFrameOptions {
            tol: get("tight-frame", &m, "tol", Some(defaults.tol))?,
            max_iters: get("tight-frame", &m, "max_iters", Some(defaults.max_iters))?,
        };
        let code = tight_frame_code(d, f, seed, opts).map_err(input)?;
        return Ok((code, format!("tight-frame d={d} F={f} seed={seed}")));
    }
    if let Some(t) = &src.basis_union {
        let m = key_values("basis-union", t, &["d", "k", "seed"])?;
        let d: usize = get("basis-union", &m, "d", None)?;
        let k: usize = get("basis-union", &m, "k", None)?;
        let seed = get("basis-union", &m, "seed", Some(0u64))?;
        let code = basis_union_code(d, k, seed).map_err(input)?;
        return Ok((code, format!("basis-union d={d} k={k} seed={seed}")));
    }
    if let Some(t) = &src.identity {
        let m = key_values("identity", t, &["d"])?;
        let d: usize = get("identity", &m, "d", None)?;
        let code = Code::identity(d).map_err(input)?;
        return Ok((code, format!("identity d={d}")));
    }
    Err(input("no code source given"))
}

fn parse_readout_kind(s: &str) -> Result<ReadoutKind, CliError> {
    match s.trim() {
        "transpose" => Ok(ReadoutKind::Transpose),
        "least-squares" => Ok(ReadoutKind::LeastSquares),
        other => Err(input(format!("unknown readout `{other}` (expected transpose or least-squares)"))),
    }
}

fn built_readout(kind: ReadoutKind, code: &Code) -> Result<Readout, CliError> {
    match kind {
        ReadoutKind::Transpose => Ok(Readout::transpose(code)),
        _ => {
            let ls = Readout::least_squares(code).map_err(input)?;
            rescale_to_unit_diagonal(&ls, code, DEFAULT_EPS_DIAG).map_err(input)
        }
    }
}

fn plan(tile: usize) -> Result<TilePlan, CliError> {
    TilePlan::new(tile, false).map_err(input)
}

/// Fixed-point text for moderate magnitudes, scientific otherwise.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if !v.is_finite() {
        format!("{v}")
    } else if (1e-4..1e9).contains(&v.abs()) {
        format!("{v:.9}")
    } else {
        format!("{v:.6e}")
    }
}

fn kv_block(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
}

fn holds(b: bool) -> String {
    if b { "holds" } else { "VIOLATED" }.into()
}

#[derive(serde::Serialize)]
struct WelchJson<'a> {
    code: &'a str,
    readout: &'a str,
    report: &'a CrosstalkReport,
    empirical_delta: f64,
    delta_check: Option<DeltaFloorCheck>,
    sum_floor_holds: bool,
    max_floor_holds: bool,
}

fn welch_check(a: WelchArgs, out: &mut dyn Write) -> CliResult {
    let (code, desc) = load_code(&a.source)?;
    let plan = plan(a.tile)?;
    let (readout, rdesc) = match &a.readout.readout_file {
        Some(path) => {
            let r = codefile::read_readout(path, &code).map_err(|e| input(format!("{}: {e}", path.display())))?;
            let r = rescale_to_unit_diagonal(&r, &code, DEFAULT_EPS_DIAG).map_err(input)?;
            (r, format!("file {} (rescaled to unit diagonal)", path.display()))
        }
        None => {
            let kind = parse_readout_kind(&a.readout.readout)?;
            let r = built_readout(kind, &code)?;
            let text = match kind {
                ReadoutKind::Transpose => "transpose".to_string(),
                _ => "least-squares (rescaled to unit diagonal)".to_string(),
            };
            (r, text)
        }
    };
    let report = crosstalk(&readout, &code, &plan).map_err(input)?;
    let delta = empirical_delta(&readout, &code, &plan).map_err(input)?;
    let (d, f) = (code.dim(), code.features());
    let delta_check = if delta < 0.5 && f > d {
        Some(delta_floor_check(delta, d, f).map_err(input)?)
    } else {
        None
    };
    let sum_ok = report.sum_floor_holds();
    let max_ok = report.max_floor_holds();
    let delta_ok = delta_check.is_none_or(|c| c.consistent);
    if a.json {
        let j = WelchJson {
            code: &desc,
            readout: &rdesc,
            report: &report,
            empirical_delta: delta,
            delta_check,
            sum_floor_holds: sum_ok,
            max_floor_holds: max_ok,
        };
        writeln!(out, "{}", serde_json::to_string_pretty(&j).expect("serializable")).map_err(input)?;
    } else {
        let mut rows = vec![
            ("code", desc.clone()),
            ("readout", rdesc.clone()),
            ("d", d.to_string()),
            ("F", f.to_string()),
            ("sum_sq_offdiag", num(report.sum_sq_offdiag)),
            ("floor_sum", num(report.floor_sum)),
            ("slack_sum", num(report.slack_sum)),
            ("mean_sq_offdiag", num(report.mean_sq_offdiag)),
            ("floor_mean", num(report.floor_mean)),
            ("max_abs_offdiag", num(report.max_abs_offdiag)),
            ("floor_max", num(report.floor_max)),
            ("empirical_delta", num(delta)),
        ];
        match &delta_check {
            Some(c) => {
                rows.push(("delta/(1-delta)", num(c.lhs)));
                rows.push(("impossibility", holds(c.consistent)));
            }
            None => rows.push(("impossibility", "not applicable".into())),
        }
        rows.push(("sum_floor", holds(sum_ok)));
        rows.push(("max_floor", holds(max_ok)));
        write!(out, "{}", kv_block(&rows)).map_err(input)?;
    }
    if sum_ok && max_ok && delta_ok {
        Ok(())
    } else {
        Err(CliError::Violation("a Welch floor is reported as violated; this indicates a software defect".into()))
    }
}

fn certificate_rows(desc: &str, c: &CodeCertificate) -> Vec<(&'static str, String)> {
    let certified = max_certified_sparsity(c.coherence, 0.0);
    vec![
        ("code", desc.to_string()),
        ("d", c.d.to_string()),
        ("F", c.features.to_string()),
        ("coherence", num(c.coherence)),
        ("welch_pair_floor", num(c.welch_pair_floor)),
        ("sum_sq_offdiag", num(c.sum_sq_offdiag)),
        ("is_tight_frame", c.is_tight_frame.to_string()),
        ("frame_bound_gap", num(c.frame_bound_gap)),
        (
            "certified_sparsity",
            if certified == usize::MAX { "unbounded".into() } else { certified.to_string() },
        ),
    ]
}

fn certify_cmd(a: CertifyArgs, out: &mut dyn Write) -> CliResult {
    let (code, desc) = load_code(&a.source)?;
    let cert = certify(&code, &plan(a.tile)?).map_err(input)?;
    if a.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&cert).expect("serializable")).map_err(input)?;
    } else {
        write!(out, "{}", kv_block(&certificate_rows(&desc, &cert))).map_err(input)?;
    }
    if cert.features > cert.d && cert.coherence < cert.welch_pair_floor - 1e-9 {
        return Err(CliError::Violation("coherence is below the Welch pair floor; this indicates a software defect".into()));
    }
    Ok(())
}

fn gen_code(a: GenCodeArgs, out: &mut dyn Write) -> CliResult {
    let (code, desc) = load_code(&a.source)?;
    codefile::write_code(&a.out, &code).map_err(input)?;
    writeln!(out, "wrote {desc} to {}", a.out.display()).map_err(input)?;
    if let (Some(kind), Some(path)) = (&a.readout, &a.readout_out) {
        let r = built_readout(parse_readout_kind(kind)?, &code)?;
        codefile::write_readout(path, &r).map_err(input)?;
        writeln!(out, "wrote {kind} readout to {}", path.display()).map_err(input)?;
    }
    Ok(())
}

fn tagged_row(name: &str, t: &Tagged) -> [String; 3] {
    [name.to_string(), num(t.value), t.provenance.label().to_string()]
}

/// Joins cells with two spaces; `right[c]` right-aligns column `c`.
fn aligned(rows: &[Vec<String>], right: &[bool]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut s = String::new();
    for r in rows {
        let cells: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, v)| {
                let w = widths[c];
                if right.get(c).copied().unwrap_or(false) {
                    format!("{v:>w$}")
                } else {
                    format!("{v:<w$}")
                }
            })
            .collect();
        s.push_str(cells.join("  ").trim_end());
        s.push('\n');
    }
    s
}

/// Comma-grouped integer part with `decimals` places.
fn grouped(v: f64, decimals: usize) -> String {
    let text = format!("{:.*}", decimals, v.abs());
    let (int, frac) = text.split_once('.').map_or((text.as_str(), None), |(i, f)| (i, Some(f)));
    let mut out = String::new();
    for (i, ch) in int.chars().enumerate() {
        if i > 0 && (int.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    if let Some(f) = frac {
        out.push('.');
        out.push_str(f);
    }
    if v < 0.0 {
        out.insert(0, '-');
    }
    out
}

/// The capacity row (`d, F_obs, F/d, d^{3/2}, d²/ln d, F/d^{3/2}`) followed by
/// every reference scale with its provenance tag.
pub fn scale_table(report: &ScaleReport, f_obs: Option<f64>) -> String {
    let d = report.params.d;
    let d32 = d.powf(1.5);
    let dash = || "-".to_string();
    let capacity = vec![
        vec!["d", "F_obs", "F/d", "d^{3/2}", "d^2/ln d", "F/d^{3/2}"]
            .into_iter()
            .map(String::from)
            .collect(),
        vec![
            grouped(d, 0),
            f_obs.map_or_else(dash, |f| grouped(f, 0)),
            f_obs.map_or_else(dash, |f| format!("{:.1}", f / d)),
            grouped(d32, 0),
            grouped(report.f_as_upper.value, 0),
            f_obs.map_or_else(dash, |f| format!("{:.2}", f / d32)),
        ],
    ];
    let p = &report.params;
    let mut scales = vec![vec!["scale".to_string(), "value".to_string(), "provenance".to_string()]];
    for (name, t) in [
        ("g(alpha)", &report.g_alpha),
        ("F_CS = d g(alpha)", &report.f_cs),
        ("F_H = (C2/C1)^2 d^{3/2} s^{-5/2}", &report.f_h_template),
        ("L_AS = d^2/ln^2 d", &report.f_as_lower),
        ("U_AS = d^2/ln d", &report.f_as_upper),
        ("ln N_JL = d eps^2", &report.n_jl_exponent),
        ("d_cross_H = g(alpha)^2", &report.d_cross_h),
        ("d_cross_AS: d/ln^2 d = g(alpha)", &report.d_cross_as),
        ("F_interp = c K^2 d^{3/2+gamma}/s^{1/2}", &report.f_interp),
    ] {
        scales.push(tagged_row(name, t).to_vec());
    }
    scales.push(vec![
        "d_cross_AS residual".into(),
        format!("{:.3e}", report.d_cross_as_residual),
        "-".into(),
    ]);
    let mut s = format!(
        "params: d={} alpha={} s={} gamma={} eps={} C1={} C2={} K_gamma={} c_gamma={}\n\n",
        p.d, p.alpha, p.s, p.gamma, p.eps, p.c1, p.c2, p.k_gamma, p.c_gamma
    );
    s.push_str(&aligned(&capacity, &[true; 6]));
    s.push('\n');
    s.push_str(&aligned(&scales, &[false, true, false]));
    s.push('\n');
    if report.ordering_holds {
        s.push_str("ordering F_CS < F_H < L_AS <= U_AS < N_JL: holds\n");
    } else {
        let pairs: Vec<String> = report
            .unseparated
            .iter()
            .map(|p| format!("{} vs {}", p.smaller, p.larger))
            .collect();
        s.push_str(&format!(
            "ordering F_CS < F_H < L_AS <= U_AS < N_JL: not separated at this d ({})\n",
            pairs.join(", ")
        ));
    }
    for note in &report.notes {
        s.push_str("note: ");
        s.push_str(note);
        s.push('\n');
    }
    s
}

#[derive(serde::Serialize)]
struct ScalesJson<'a> {
    #[serde(flatten)]
    report: &'a ScaleReport,
    f_obs: Option<f64>,
}

fn scales(a: ScalesArgs, out: &mut dyn Write) -> CliResult {
    let params = ScaleParams {
        d: a.d,
        alpha: a.alpha,
        s: a.s,
        gamma: a.gamma,
        eps: a.eps,
        c1: a.c1,
        c2: a.c2,
        k_gamma: a.k_gamma,
        c_gamma: a.c_gamma,
    };
    if let Some(f) = a.f_obs {
        if !(f > 0.0 && f.is_finite()) {
            return Err(input(format!("--f-obs = {f} must be > 0")));
        }
    }
    let report = hierarchy_report(params).map_err(input)?;
    if a.json {
        let j = ScalesJson {
            report: &report,
            f_obs: a.f_obs,
        };
        writeln!(out, "{}", serde_json::to_string_pretty(&j).expect("serializable")).map_err(input)?;
    } else {
        write!(out, "{}", scale_table(&report, a.f_obs)).map_err(input)?;
    }
    Ok(())
}

fn list<T: std::str::FromStr>(flag: &str, text: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|e| input(format!("invalid config field `{flag}`: cannot parse `{t}`: {e}"))))
        .collect()
}

fn experiment(a: ExperimentArgs, out: &mut dyn Write) -> CliResult {
    let run = config::load(&a.config).map_err(|e| input(format!("{}: {e}", a.config.display())))?;
    let dir = a.out.or_else(|| run.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    execute(&run, Some(&a.config), &dir, run.plots && !a.no_plots, out)
}

fn kind_command(kind: ExperimentKind, a: KindArgs, out: &mut dyn Write) -> CliResult {
    let mut run = match &a.config {
        Some(path) => {
            let r = config::load(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
            if r.experiment.kind != kind {
                return Err(input(format!(
                    "invalid config field `experiment`: {} does not match subcommand {kind}",
                    r.experiment.kind
                )));
            }
            r
        }
        None => RunConfig::defaults(kind),
    };
    let cfg = &mut run.experiment;
    let grid = RawGrid {
        d: a.d.as_deref().map(|t| list("grid.d", t)).transpose()?,
        features: a.features.as_deref().map(|t| list::<FeatureRule>("grid.F", t)).transpose()?,
        s: a.s.as_deref().map(|t| list("grid.s", t)).transpose()?,
        noise: a.noise.as_deref().map(|t| list::<NoiseSpec>("grid.noise", t)).transpose()?,
        delta: a.delta.as_deref().map(|t| list("grid.delta", t)).transpose()?,
    };
    config::apply_grid(cfg, grid);
    let readouts = match a.readouts.as_deref() {
        Some(t) => Some(
            t.split(',')
                .map(parse_readout_kind)
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    let opts = RawOptions {
        fixed_code: a.fixed_code.then_some(true),
        readouts,
        coherence_constant: a.coherence_constant,
        phase_constant: a.phase_constant,
        certify_trials: a.certify_trials.then_some(true),
        parallel_trials: a.parallel.then_some(true),
        tail_multipliers: a.tail.as_deref().map(|t| list("options.tail_multipliers", t)).transpose()?,
    };
    config::apply_options(cfg, opts);
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(t) = a.tile {
        cfg.plan.tile_cols = t;
    }
    cfg.validate().map_err(input)?;
    let dir = a.out.or_else(|| run.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let plots = run.plots && !a.no_plots;
    execute(&run, a.config.as_deref(), &dir, plots, out)
}

/// Rendered artifacts of one result, as `(relative path, content)`.
pub fn artifacts(result: &ExperimentResult, plots: bool) -> Vec<(String, Vec<u8>)> {
    let mut files = vec![
        ("results.csv".to_string(), output::to_csv(result).into_bytes()),
        ("results.json".to_string(), output::to_json(result).into_bytes()),
    ];
    if plots {
        for (name, doc) in svg::plots_for(result) {
            files.push((format!("plots/{name}"), doc.into_bytes()));
        }
    }
    files
}

fn execute(run: &RunConfig, config_path: Option<&Path>, dir: &Path, plots: bool, out: &mut dyn Write) -> CliResult {
    let started = Instant::now();
    let result = experiments::run(&run.experiment).map_err(input)?;
    let files = artifacts(&result, plots);
    let io = |e: std::io::Error| input(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    if plots {
        std::fs::create_dir_all(dir.join("plots")).map_err(io)?;
    }
    let mut digests = Vec::new();
    for (name, content) in &files {
        std::fs::write(dir.join(name), content).map_err(io)?;
        digests.push(FileDigest::of(name, content));
    }
    let manifest = RunManifest {
        config_path: config_path.map(path_text),
        config: run.experiment.clone(),
        output_dir: path_text(dir),
        files: digests,
        version: env!("CARGO_PKG_VERSION"),
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    std::fs::write(dir.join("manifest.json"), manifest.to_json()).map_err(io)?;
    writeln!(
        out,
        "{}: {} rows, {} files written to {}",
        result.metadata.experiment,
        result.rows.len(),
        files.len() + 1,
        dir.display()
    )
    .map_err(input)?;
    let violations: Vec<_> = result.violations().collect();
    for v in &violations {
        let b = v.bound.as_ref().expect("violations carry a bound");
        writeln!(
            out,
            "violated: {} d={} F={} s={} value={} {}={}",
            v.statistic,
            v.d,
            v.features,
            v.s.map_or("-".into(), |s| s.to_string()),
            output::fmt_f64(v.value),
            b.name,
            output::fmt_f64(b.value)
        )
        .map_err(input)?;
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Violation(format!(
            "{} proved bound(s) reported as violated; this indicates a software defect",
            violations.len()
        )))
    }
}
