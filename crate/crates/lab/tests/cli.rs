use std::path::Path;
use std::process::{Command, Output};

fn sclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sclab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(path).unwrap()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(key).filter(|rest| rest.starts_with(' ')).map(|r| r.trim().to_string()))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

#[test]
fn scales_tables_match_golden_files() {
    for (args, file) in [
        (&["scales", "--d", "1152", "--alpha", "0.99", "--f-obs", "9216"][..], "scales_1152.txt"),
        (&["scales", "--d", "2304", "--alpha", "0.992", "--f-obs", "18432"][..], "scales_2304.txt"),
        (&["scales", "--d", "100", "--gamma", "0.5"][..], "scales_gamma_half.txt"),
    ] {
        let o = sclab(args);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), golden(file), "{file}");
    }
}

#[test]
fn scales_rows_carry_reported_values() {
    let text = golden("scales_1152.txt");
    assert!(text.contains("39,100") && text.contains("188,262") && text.contains("0.24"));
    let gamma = golden("scales_gamma_half.txt");
    let row = gamma.lines().find(|l| l.starts_with("F_interp")).unwrap();
    assert!(row.contains("10000.000000000") && row.trim_end().ends_with("CONDITIONAL"));
}

#[test]
fn scales_domain_error_exits_one() {
    let o = sclab(&["scales", "--alpha", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("alpha"));
    assert_eq!(sclab(&["scales", "--nonsense"]).status.code(), Some(1));
}

#[test]
fn scales_json_is_tagged() {
    let o = sclab(&["scales", "--json", "--d", "2048"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["f_interp"]["provenance"], "CONDITIONAL");
    assert_eq!(v["f_as_upper"]["provenance"], "PROVED-IMPORTED");
}

#[test]
fn welch_check_tight_frame_sits_on_the_floor() {
    let o = sclab(&["welch-check", "--tight-frame", "d=4", "F=8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let slack: f64 = field(&text, "slack_sum").parse().unwrap();
    assert!(slack.abs() < 1e-8);
    assert_eq!(field(&text, "sum_floor"), "holds");
}

#[test]
fn welch_check_identity_is_all_zero() {
    let o = sclab(&["welch-check", "--identity", "d=5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for key in ["sum_sq_offdiag", "floor_sum", "slack_sum", "max_abs_offdiag", "floor_max"] {
        assert_eq!(field(&text, key), "0", "{key}");
    }
}

#[test]
fn welch_check_least_squares_and_json() {
    let o = sclab(&["welch-check", "--random", "d=6", "F=20", "seed=3", "--readout", "least-squares", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["report"]["slack_sum"].as_f64().unwrap() >= -1e-9);
}

#[test]
fn welch_check_generator_typos_exit_one() {
    let o = sclab(&["welch-check", "--tight-frame", "d=4", "G=8"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown key `G`"));
    assert_eq!(sclab(&["welch-check"]).status.code(), Some(1));
}

#[test]
fn truncated_code_file_names_the_offset() {
    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("c.sclb");
    let o = sclab(&["gen-code", "--random", "d=4", "F=8", "seed=1", "--out", code.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let bytes = std::fs::read(&code).unwrap();
    assert_eq!(bytes.len(), 12 + 8 * 32);
    let cut = dir.path().join("cut.sclb");
    std::fs::write(&cut, &bytes[..100]).unwrap();
    let o = sclab(&["welch-check", "--code", cut.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("byte offset 100"), "{}", stderr(&o));
}

#[test]
fn code_and_readout_files_round_trip_through_commands() {
    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("c.sclb");
    let readout = dir.path().join("r.sclr");
    let o = sclab(&[
        "gen-code",
        "--basis-union",
        "d=4",
        "k=3",
        "seed=2",
        "--out",
        code.to_str().unwrap(),
        "--readout",
        "transpose",
        "--readout-out",
        readout.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = sclab(&["welch-check", "--code", code.to_str().unwrap(), "--readout-file", readout.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let slack: f64 = field(&stdout(&o), "slack_sum").parse().unwrap();
    assert!(slack.abs() < 1e-8);
    let o = sclab(&["certify", "--code", code.to_str().unwrap()]);
    assert_eq!(field(&stdout(&o), "is_tight_frame"), "true");
    assert_eq!(field(&stdout(&o), "F"), "12");
}

#[test]
fn certify_prints_the_certificate() {
    let o = sclab(&["certify", "--identity", "d=5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(field(&text, "coherence"), "0");
    assert_eq!(field(&text, "certified_sparsity"), "unbounded");
}

const SMALL_PHASE: &str = r#"
experiment = "recovery-phase"
trials = 40
seed = 9
[grid]
d = [8, 12]
F = ["2d"]
s = [1, 2]
noise = ["none", "score:0.05"]
"#;

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn experiment_writes_artifacts_and_reproduces_digests() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_PHASE);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = sclab(&["experiment", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let csv = std::fs::read_to_string(a.join("results.csv")).unwrap();
    assert!(csv.starts_with("experiment,d,F,s,noise,statistic,value,stderr,bound,bound_name,satisfied,trials,seed\n"));
    assert!(a.join("plots/phase_none.svg").exists());
    assert!(a.join("plots/phase_score_0.05.svg").exists());
    let digests = |dir: &Path| {
        let m: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
        m["files"].clone()
    };
    assert_eq!(digests(&a), digests(&b));
    assert_eq!(digests(&a).as_array().unwrap().len(), 6);
}

#[test]
fn zero_trials_exit_one_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "experiment = \"coherence-tail\"\ntrials = 0\n");
    let o = sclab(&["experiment", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("trials must be ≥ 1"), "{}", stderr(&o));
}

#[test]
fn unknown_config_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "experiment = \"coherence-tail\"\n[grid]\ndee = [3]\n");
    let o = sclab(&["experiment", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("dee"), "{}", stderr(&o));
}

#[test]
fn per_kind_subcommands_match_the_config_route() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_PHASE);
    let via_config = dir.path().join("c");
    let via_flags = dir.path().join("f");
    let o = sclab(&["experiment", "--config", &cfg, "--out", via_config.to_str().unwrap(), "--no-plots"]);
    assert_eq!(o.status.code(), Some(0));
    let o = sclab(&[
        "recovery-phase",
        "--d",
        "8,12",
        "--F",
        "2d",
        "--s",
        "1,2",
        "--noise",
        "none,score:0.05",
        "--trials",
        "40",
        "--seed",
        "9",
        "--out",
        via_flags.to_str().unwrap(),
        "--no-plots",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        std::fs::read(via_config.join("results.csv")).unwrap(),
        std::fs::read(via_flags.join("results.csv")).unwrap()
    );
    let o = sclab(&["coherence-tail", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn every_kind_runs_from_its_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, extra) in [
        ("coherence-tail", &["--d", "8", "--F", "4d"][..]),
        ("interference-tail", &["--d", "8", "--s", "0,3"][..]),
        ("energy-floor", &["--d", "8", "--F", "4d", "--s", "2"][..]),
        ("quadratic-separation", &["--d", "8"][..]),
    ] {
        let out = dir.path().join(kind);
        let mut args = vec![kind, "--trials", "20", "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = sclab(&args);
        assert_eq!(o.status.code(), Some(0), "{kind}: {}", stderr(&o));
        assert!(out.join("results.json").exists());
        assert!(std::fs::read_dir(out.join("plots")).unwrap().count() >= 1);
    }
}
