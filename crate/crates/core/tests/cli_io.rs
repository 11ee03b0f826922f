//! End-to-end CLI checks through the compiled binary: exit codes, artifact
//! formats, determinism, and config-file layering.

use std::path::PathBuf;
use std::process::{Command, Output};

use purisim::output::{
    parse_sweep_csv, parse_trace_csv, RunReport, SWEEP_HEADER, TRACE_HEADER,
};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_purisim"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn binary");
    assert!(
        out.status.success(),
        "exit {:?} for {args:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().expect("spawn binary");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn temp_path(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("purisim-cli-io");
    std::fs::create_dir_all(&dir).expect("create temp dir");
    dir.join(name)
}

#[test]
fn help_and_version_exit_zero() {
    run_ok(&["--help"]);
    run_ok(&["--version"]);
    run_ok(&["run", "--help"]);
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    let (code, _) = exit_code(&[]);
    assert_eq!(code, 2);
    let (code, _) = exit_code(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn stats_prints_supported_rows_and_sums() {
    let out = run_ok(&["stats", "--n", "4", "--c1", "0.75"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# meta: {"));
    assert_eq!(lines.next().unwrap(), "m,p_m,f_m");
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#') && *l != "m,p_m,f_m").collect();
    // Interior channel strength keeps every even register size reachable.
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("0,"));
    assert!(rows[1].starts_with("2,"));
    assert!(rows[2].starts_with("4,"));
    assert!(text.contains("# sum_p_m = 1"));
    assert!(text.contains("# c1 = 0.75"));
}

#[test]
fn stats_rejects_odd_sizes() {
    let (code, stderr) = exit_code(&["stats", "--n", "5"]);
    assert_eq!(code, 2);
    assert!(stderr.starts_with("error:"), "stderr: {stderr}");
}

#[test]
fn run_emits_a_parsable_report_echoing_the_flags() {
    let out = run_ok(&[
        "run", "--n", "4", "--c1", "0.8", "--trials", "100", "--seed", "7", "--grid-size",
        "256", "--purify", "--weighting", "sampled", "--strategy", "random",
    ]);
    let report = RunReport::parse(&stdout(&out)).expect("parse run report");
    assert_eq!(report.config.n_qubits, 4);
    assert_eq!(report.config.c1, 0.8);
    assert_eq!(report.config.trials, 100);
    assert_eq!(report.config.master_seed, 7);
    assert_eq!(report.config.grid_size, 256);
    assert!(report.config.purify);
    assert_eq!(report.config.strategy.to_string(), "random");
    assert_eq!(report.config.weighting.to_string(), "sampled");
    assert_eq!(report.result.step_curve.len(), 4);
    assert_eq!(report.result.step_std_errors.len(), 4);
    assert!(report.result.mean_fidelity > 0.0 && report.result.mean_fidelity < 1.0);
}

#[test]
fn run_rejects_invalid_scenarios_as_usage_errors() {
    for args in [
        vec!["run", "--trials", "0"],
        vec!["run", "--n", "3"],
        vec!["run", "--n", "14"],
        vec!["run", "--c1", "0.3"],
        vec!["run", "--grid-size", "1"],
    ] {
        let (code, stderr) = exit_code(&args);
        assert_eq!(code, 2, "args {args:?} stderr {stderr}");
        assert!(stderr.starts_with("error:"), "args {args:?} stderr {stderr}");
        assert_eq!(stderr.trim_end().lines().count(), 1, "stderr should be one line: {stderr}");
    }
}

#[test]
fn same_seed_means_identical_payload_and_epoch_pins_the_whole_file() {
    let args = ["run", "--n", "4", "--trials", "120", "--grid-size", "256", "--seed", "11"];
    let a = run_ok(&args);
    let b = run_ok(&args);
    let ra = RunReport::parse(&stdout(&a)).unwrap();
    let rb = RunReport::parse(&stdout(&b)).unwrap();
    assert_eq!(ra.result, rb.result);
    assert_eq!(ra.config, rb.config);

    let epoch = ("SOURCE_DATE_EPOCH", "1700000000");
    let c = bin().args(args).env(epoch.0, epoch.1).output().unwrap();
    let d = bin().args(args).env(epoch.0, epoch.1).output().unwrap();
    assert!(c.status.success() && d.status.success());
    assert_eq!(c.stdout, d.stdout, "byte-identical output under a pinned epoch");
    assert!(stdout(&c).contains("\"generatedAt\": \"2023-11-14T22:13:20Z\""));
}

#[test]
fn worker_count_does_not_change_the_payload() {
    let base = ["run", "--n", "4", "--trials", "120", "--grid-size", "256", "--seed", "5"];
    let epoch = ("SOURCE_DATE_EPOCH", "1700000000");
    let one = bin().args(base).args(["--workers", "1"]).env(epoch.0, epoch.1).output().unwrap();
    let four = bin().args(base).args(["--workers", "4"]).env(epoch.0, epoch.1).output().unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn out_flag_writes_the_file_and_bad_paths_fail_cleanly() {
    let path = temp_path("report.json");
    let _ = std::fs::remove_file(&path);
    let out = run_ok(&[
        "run", "--n", "2", "--trials", "50", "--grid-size", "256", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(stdout(&out).is_empty(), "file output should not also print to stdout");
    let text = std::fs::read_to_string(&path).expect("report file written");
    RunReport::parse(&text).expect("file contains a valid report");

    let (code, stderr) =
        exit_code(&["run", "--n", "2", "--trials", "50", "--grid-size", "256", "--out", "/nonexistent-dir/report.json"]);
    assert_eq!(code, 1);
    assert!(stderr.starts_with("error:"), "stderr: {stderr}");
    assert_eq!(stderr.trim_end().lines().count(), 1);
}

#[test]
fn sweep_emits_the_pinned_header_and_round_trips() {
    let out = run_ok(&[
        "sweep", "--n", "4", "--trials", "80", "--grid-size", "256", "--seed", "3",
        "--c1-min", "0.6", "--c1-max", "0.8", "--c1-steps", "3",
    ]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# meta: {"));
    assert_eq!(lines.next().unwrap(), SWEEP_HEADER);
    let (meta, rows) = parse_sweep_csv(&text).expect("parse sweep");
    assert_eq!(meta.c1_values, vec![0.6, 0.7, 0.8]);
    // Two variants per channel value, channel ascending, purified first.
    assert_eq!(rows.len(), 6);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.c1, meta.c1_values[i / 2]);
        assert_eq!(row.purify, i % 2 == 0);
        assert_eq!(row.n_qubits, 4);
        assert_eq!(row.trials, 80);
        assert_eq!(row.seed, 3);
    }
    let rerendered = purisim::output::render_sweep_csv(&meta, &rows);
    assert_eq!(rerendered, text, "render(parse(csv)) reproduces the bytes");
}

#[test]
fn sweep_strategy_comparison_pairs_adaptive_and_random() {
    let out = run_ok(&[
        "sweep", "--n", "2", "--trials", "60", "--grid-size", "256", "--compare", "strategy",
        "--c1-min", "0.7", "--c1-max", "0.7", "--c1-steps", "1", "--purify",
    ]);
    let (_, rows) = parse_sweep_csv(&stdout(&out)).expect("parse sweep");
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].strategy.to_string(), "adaptive");
    assert_eq!(rows[1].strategy.to_string(), "random");
    assert!(rows.iter().all(|r| r.purify));
}

#[test]
fn trace_emits_one_row_per_step_and_pipeline() {
    let out = run_ok(&["trace", "--n", "4", "--trials", "60", "--grid-size", "256"]);
    let text = stdout(&out);
    assert_eq!(text.lines().nth(1).unwrap(), TRACE_HEADER);
    let (_, rows) = parse_trace_csv(&text).expect("parse trace");
    assert_eq!(rows.len(), 8);
    let purified: Vec<_> = rows.iter().filter(|r| r.pipeline == "purified").collect();
    let unpurified: Vec<_> = rows.iter().filter(|r| r.pipeline == "unpurified").collect();
    assert_eq!(purified.len(), 4);
    assert_eq!(unpurified.len(), 4);
    assert_eq!(purified.iter().map(|r| r.n).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
    assert_eq!(unpurified.iter().map(|r| r.n).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
}

#[test]
fn config_file_fills_defaults_and_flags_win() {
    let path = temp_path("scenario.json");
    std::fs::write(&path, r#"{"n": 4, "trials": 90, "seed": 13, "grid_size": 256, "purify": true}"#)
        .unwrap();
    let out = run_ok(&["run", "--config", path.to_str().unwrap(), "--trials", "70"]);
    let report = RunReport::parse(&stdout(&out)).unwrap();
    assert_eq!(report.config.n_qubits, 4);
    assert_eq!(report.config.trials, 70, "flag beats config file");
    assert_eq!(report.config.master_seed, 13);
    assert!(report.config.purify);

    let (code, stderr) = exit_code(&["run", "--config", "/nonexistent-dir/cfg.json"]);
    assert_eq!(code, 1, "unreadable config is an IO failure: {stderr}");

    let bad = temp_path("bad.json");
    std::fs::write(&bad, r#"{"purfy": true}"#).unwrap();
    let (code, stderr) = exit_code(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(code, 2, "unknown keys are usage errors");
    assert!(stderr.contains("purfy"), "stderr names the offending key: {stderr}");
}
