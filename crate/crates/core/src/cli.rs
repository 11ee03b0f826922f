//! Command-line front end.
//!
//! Four subcommands cover the experiment surface: `stats` prints the
//! purification size table for one channel, `run` executes a single scenario
//! and emits a JSON report, `sweep` compares scenario pairs across a channel
//! range as CSV, and `trace` emits per-step fidelity curves for both
//! pipelines as CSV.
//!
//! Configuration precedence is flags over `--config` JSON file over built-in
//! defaults. Validation failures exit 2 with a one-line diagnostic on
//! stderr; I/O failures exit 1; success writes the report to `--out` or
//! stdout and exits 0.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::harness::{
    fidelity_trace, run_scenario, sweep_c1, CompareMode, ScenarioConfig, Strategy, Weighting,
};
use crate::output::{
    c1_grid, generated_at, render_stats, render_sweep_csv, render_trace_csv, stats_report,
    trace_rows, ConfigEcho, RunReport, SweepMeta, TraceMeta, SCHEMA_VERSION,
};
use crate::Error;

#[derive(Parser)]
#[command(
    name = "purisim",
    version,
    about = "Qubit purification and adaptive estimation simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print size probabilities and fidelities of the purification step
    Stats(StatsArgs),
    /// Run one scenario and emit a JSON report
    Run(ScenarioArgs),
    /// Compare scenario pairs across a channel range, as CSV
    Sweep(SweepArgs),
    /// Emit per-step fidelity curves for both pipelines, as CSV
    Trace(ScenarioArgs),
}

#[derive(Args, Clone)]
struct StatsArgs {
    /// Ensemble size (even, 2 to 12) [default: 6]
    #[arg(long)]
    n: Option<usize>,
    /// Channel strength in [0.5, 1] [default: 0.75]
    #[arg(long)]
    c1: Option<f64>,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with defaults for the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    /// Ensemble size per trial (even, 2 to 12) [default: 6]
    #[arg(long)]
    n: Option<usize>,
    /// Channel strength in [0.5, 1] [default: 0.75]
    #[arg(long)]
    c1: Option<f64>,
    /// Number of trials [default: 40000]
    #[arg(long)]
    trials: Option<usize>,
    /// Probe direction strategy [default: adaptive]
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    /// Enable the purification stage (run/sweep only; trace runs both)
    #[arg(long, overrides_with = "no_purify")]
    purify: bool,
    /// Disable the purification stage [default]
    #[arg(long, overrides_with = "purify")]
    no_purify: bool,
    /// Posterior grid resolution [default: 1024]
    #[arg(long)]
    grid_size: Option<usize>,
    /// Master seed for all randomness [default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 means machine parallelism [default: 0]
    #[arg(long)]
    workers: Option<usize>,
    /// Purified register-size weighting [default: exact]
    #[arg(long, value_enum)]
    weighting: Option<WeightingArg>,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with defaults for the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SweepArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Lowest channel strength [default: 0.5]
    #[arg(long)]
    c1_min: Option<f64>,
    /// Highest channel strength [default: 1.0]
    #[arg(long)]
    c1_max: Option<f64>,
    /// Number of grid points, endpoints included [default: 11]
    #[arg(long)]
    c1_steps: Option<usize>,
    /// Which scenario pair to compare at each point [default: purify]
    #[arg(long, value_enum)]
    compare: Option<CompareArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Adaptive,
    Random,
}

impl From<StrategyArg> for Strategy {
    fn from(value: StrategyArg) -> Self {
        match value {
            StrategyArg::Adaptive => Strategy::Adaptive,
            StrategyArg::Random => Strategy::Random,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WeightingArg {
    Exact,
    Sampled,
}

impl From<WeightingArg> for Weighting {
    fn from(value: WeightingArg) -> Self {
        match value {
            WeightingArg::Exact => Weighting::Exact,
            WeightingArg::Sampled => Weighting::Sampled,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CompareArg {
    Purify,
    Strategy,
}

impl From<CompareArg> for CompareMode {
    fn from(value: CompareArg) -> Self {
        match value {
            CompareArg::Purify => CompareMode::Purify,
            CompareArg::Strategy => CompareMode::Strategy,
        }
    }
}

/// Optional configuration file; every field mirrors a flag.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    n: Option<usize>,
    c1: Option<f64>,
    trials: Option<usize>,
    strategy: Option<Strategy>,
    purify: Option<bool>,
    grid_size: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
    weighting: Option<Weighting>,
    c1_min: Option<f64>,
    c1_max: Option<f64>,
    c1_steps: Option<usize>,
    compare: Option<CompareMode>,
}

/// Command failure with its process exit code.
#[derive(Debug)]
pub struct CliFailure {
    pub message: String,
    pub exit_code: i32,
}

impl CliFailure {
    fn usage(message: impl Into<String>) -> Self {
        Self { message: message.into(), exit_code: 2 }
    }

    fn io(message: impl Into<String>) -> Self {
        Self { message: message.into(), exit_code: 1 }
    }
}

impl From<Error> for CliFailure {
    fn from(err: Error) -> Self {
        match err {
            Error::InvalidArgument(_) => CliFailure::usage(err.to_string()),
            other => CliFailure { message: other.to_string(), exit_code: 1 },
        }
    }
}

fn load_config_file(path: Option<&PathBuf>) -> Result<ConfigFile, CliFailure> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliFailure::io(format!("cannot read config file {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliFailure::usage(format!("bad config file {}: {e}", path.display())))
}

/// Scenario settings after merging flags, config file, and defaults.
#[derive(Debug, Clone, PartialEq)]
struct Resolved {
    cfg: ScenarioConfig,
    workers: usize,
    out: Option<PathBuf>,
}

impl ScenarioArgs {
    fn resolve(&self) -> Result<Resolved, CliFailure> {
        let file = load_config_file(self.config.as_ref())?;
        let defaults = ScenarioConfig::default();
        let purify_flag = if self.purify {
            Some(true)
        } else if self.no_purify {
            Some(false)
        } else {
            None
        };
        let cfg = ScenarioConfig {
            n_qubits: self.n.or(file.n).unwrap_or(defaults.n_qubits),
            c1: self.c1.or(file.c1).unwrap_or(defaults.c1),
            trials: self.trials.or(file.trials).unwrap_or(defaults.trials),
            strategy: self
                .strategy
                .map(Strategy::from)
                .or(file.strategy)
                .unwrap_or(defaults.strategy),
            purify: purify_flag.or(file.purify).unwrap_or(false),
            grid_size: self.grid_size.or(file.grid_size).unwrap_or(defaults.grid_size),
            master_seed: self.seed.or(file.seed).unwrap_or(defaults.master_seed),
            weighting: self
                .weighting
                .map(Weighting::from)
                .or(file.weighting)
                .unwrap_or(defaults.weighting),
        };
        cfg.validate()?;
        Ok(Resolved {
            cfg,
            workers: self.workers.or(file.workers).unwrap_or(0),
            out: self.out.clone(),
        })
    }
}

#[derive(Debug)]
struct SweepPlan {
    resolved: Resolved,
    c1_values: Vec<f64>,
    compare: CompareMode,
}

impl SweepArgs {
    fn resolve(&self) -> Result<SweepPlan, CliFailure> {
        let resolved = self.scenario.resolve()?;
        let file = load_config_file(self.scenario.config.as_ref())?;
        let min = self.c1_min.or(file.c1_min).unwrap_or(0.5);
        let max = self.c1_max.or(file.c1_max).unwrap_or(1.0);
        let steps = self.c1_steps.or(file.c1_steps).unwrap_or(11);
        let compare = self
            .compare
            .map(CompareMode::from)
            .or(file.compare)
            .unwrap_or(CompareMode::Purify);
        let c1_values = c1_grid(min, max, steps)?;
        for &c1 in &c1_values {
            ScenarioConfig { c1, ..resolved.cfg }.validate()?;
        }
        Ok(SweepPlan { resolved, c1_values, compare })
    }
}

fn install_workers(workers: usize) -> Result<(), CliFailure> {
    if workers == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliFailure::usage(format!("cannot configure {workers} workers: {e}")))
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliFailure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliFailure::io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_stats(args: &StatsArgs) -> Result<(String, Option<PathBuf>), CliFailure> {
    let file = load_config_file(args.config.as_ref())?;
    let n = args.n.or(file.n).unwrap_or(6);
    let c1 = args.c1.or(file.c1).unwrap_or(0.75);
    let report = stats_report(n, c1)?;
    Ok((render_stats(&report, generated_at()), args.out.clone()))
}

fn cmd_run(args: &ScenarioArgs) -> Result<(String, Option<PathBuf>), CliFailure> {
    let resolved = args.resolve()?;
    install_workers(resolved.workers)?;
    let summary = run_scenario(&resolved.cfg)?;
    let report = RunReport::new(&resolved.cfg, &summary, generated_at());
    Ok((report.render(), resolved.out))
}

fn cmd_sweep(args: &SweepArgs) -> Result<(String, Option<PathBuf>), CliFailure> {
    let plan = args.resolve()?;
    install_workers(plan.resolved.workers)?;
    let rows = sweep_c1(&plan.resolved.cfg, &plan.c1_values, plan.compare)?;
    let meta = SweepMeta {
        schema_version: SCHEMA_VERSION.to_string(),
        generated_at: generated_at(),
        command: "sweep".to_string(),
        config: ConfigEcho::new(&plan.resolved.cfg),
        compare: plan.compare,
        c1_values: plan.c1_values.clone(),
    };
    Ok((render_sweep_csv(&meta, &rows), plan.resolved.out))
}

fn cmd_trace(args: &ScenarioArgs) -> Result<(String, Option<PathBuf>), CliFailure> {
    let resolved = args.resolve()?;
    install_workers(resolved.workers)?;
    let curves = fidelity_trace(&resolved.cfg)?;
    let meta = TraceMeta {
        schema_version: SCHEMA_VERSION.to_string(),
        generated_at: generated_at(),
        command: "trace".to_string(),
        config: ConfigEcho::new(&resolved.cfg),
    };
    Ok((render_trace_csv(&meta, &trace_rows(&curves)), resolved.out))
}

/// Parses arguments, runs the selected command, and returns the process exit
/// code. Clap handles `--help`/`--version` (exit 0) and usage errors (exit
/// 2) before this dispatch is reached.
pub fn run_cli() -> i32 {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Stats(args) => cmd_stats(args),
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Trace(args) => cmd_trace(args),
    };
    match outcome.and_then(|(text, out)| emit(&text, out.as_ref()).map(|()| ())) {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.exit_code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario_args(argv: &[&str]) -> ScenarioArgs {
        let mut full = vec!["purisim", "run"];
        full.extend_from_slice(argv);
        match Cli::try_parse_from(full).unwrap().command {
            Command::Run(args) => args,
            _ => unreachable!(),
        }
    }

    #[test]
    fn defaults_match_the_documented_values() {
        let resolved = scenario_args(&[]).resolve().unwrap();
        assert_eq!(resolved.cfg, ScenarioConfig { purify: false, ..ScenarioConfig::default() });
        assert_eq!(resolved.workers, 0);
        assert!(resolved.out.is_none());
    }

    #[test]
    fn flags_override_defaults() {
        let resolved = scenario_args(&[
            "--n", "4", "--c1", "0.9", "--trials", "77", "--strategy", "random", "--purify",
            "--grid-size", "128", "--seed", "9", "--workers", "3", "--weighting", "sampled",
        ])
        .resolve()
        .unwrap();
        assert_eq!(
            resolved.cfg,
            ScenarioConfig {
                n_qubits: 4,
                c1: 0.9,
                trials: 77,
                strategy: Strategy::Random,
                purify: true,
                grid_size: 128,
                master_seed: 9,
                weighting: Weighting::Sampled,
            }
        );
        assert_eq!(resolved.workers, 3);
    }

    #[test]
    fn purify_flags_override_each_other() {
        assert!(scenario_args(&["--purify"]).resolve().unwrap().cfg.purify);
        assert!(!scenario_args(&["--no-purify"]).resolve().unwrap().cfg.purify);
        // Later flag wins when both appear.
        assert!(!scenario_args(&["--purify", "--no-purify"]).resolve().unwrap().cfg.purify);
        assert!(scenario_args(&["--no-purify", "--purify"]).resolve().unwrap().cfg.purify);
    }

    #[test]
    fn config_file_fills_gaps_and_flags_take_precedence() {
        let dir = std::env::temp_dir().join("purisim-cli-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("config.json");
        std::fs::write(
            &path,
            r#"{"n": 4, "c1": 0.85, "strategy": "random", "purify": true, "seed": 7}"#,
        )
        .unwrap();
        let path_str = path.to_str().unwrap();
        let resolved =
            scenario_args(&["--config", path_str, "--c1", "0.6"]).resolve().unwrap();
        assert_eq!(resolved.cfg.n_qubits, 4);
        assert_eq!(resolved.cfg.c1, 0.6);
        assert_eq!(resolved.cfg.strategy, Strategy::Random);
        assert!(resolved.cfg.purify);
        assert_eq!(resolved.cfg.master_seed, 7);
        // An explicit --no-purify beats the file's purify: true.
        let resolved =
            scenario_args(&["--config", path_str, "--no-purify"]).resolve().unwrap();
        assert!(!resolved.cfg.purify);
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn bad_inputs_are_usage_failures() {
        assert_eq!(scenario_args(&["--n", "5"]).resolve().unwrap_err().exit_code, 2);
        assert_eq!(scenario_args(&["--trials", "0"]).resolve().unwrap_err().exit_code, 2);
        assert_eq!(scenario_args(&["--c1", "0.3"]).resolve().unwrap_err().exit_code, 2);
        let missing = scenario_args(&["--config", "/nonexistent/path.json"])
            .resolve()
            .unwrap_err();
        assert_eq!(missing.exit_code, 1);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = std::env::temp_dir().join("purisim-cli-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad-config.json");
        std::fs::write(&path, r#"{"n": 4, "purfy": true}"#).unwrap();
        let failure =
            scenario_args(&["--config", path.to_str().unwrap()]).resolve().unwrap_err();
        assert_eq!(failure.exit_code, 2);
        assert!(failure.message.contains("purfy"));
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn sweep_plan_builds_the_channel_grid() {
        let argv = vec![
            "purisim", "sweep", "--trials", "10", "--c1-min", "0.6", "--c1-max", "0.8",
            "--c1-steps", "3", "--compare", "strategy",
        ];
        let Command::Sweep(args) = Cli::try_parse_from(argv).unwrap().command else {
            unreachable!()
        };
        let plan = args.resolve().unwrap();
        assert_eq!(plan.c1_values, vec![0.6, 0.7, 0.8]);
        assert_eq!(plan.compare, CompareMode::Strategy);
        // Out-of-domain grid values fail validation up front.
        let argv = vec!["purisim", "sweep", "--c1-min", "0.3", "--c1-max", "0.8"];
        let Command::Sweep(args) = Cli::try_parse_from(argv).unwrap().command else {
            unreachable!()
        };
        assert_eq!(args.resolve().unwrap_err().exit_code, 2);
    }
}
