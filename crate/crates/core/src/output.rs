//! Serialization of experiment results to JSON reports and CSV tables.
//!
//! Every number is rounded to 10 significant decimal digits before it is
//! stored in a report, and both serializers print the shortest decimal form
//! that parses back to the identical `f64`. Emitted files therefore
//! round-trip exactly: parsing a file reproduces the in-memory record, and
//! re-rendering it reproduces the bytes.
//!
//! CSV files start with a single `# meta:` comment line carrying the full
//! configuration and seed as compact JSON, so every output embeds what is
//! needed to reproduce it; the header row that follows is the pinned column
//! string itself.

use serde::{Deserialize, Serialize};

use crate::harness::{
    CompareMode, ScenarioConfig, ScenarioSummary, Strategy, SweepRow, TraceCurves, Weighting,
};
use crate::purify::{
    mean_purified_fidelity, purification_distribution, single_qubit_fidelity, ChannelSpec,
};
use crate::{Error, Result};

/// Rounds to 10 significant decimal digits (the precision of all emitted
/// numbers). Exact for zero, infinities, and NaN.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.9e}").parse().expect("scientific notation reparses")
}

/// Shortest decimal string of the 10-digit rounding of `x`; parsing it
/// yields exactly `round_sig(x)`.
pub fn fmt_sig(x: f64) -> String {
    format!("{}", round_sig(x))
}

/// RFC 3339 UTC timestamp for report headers. Honors `SOURCE_DATE_EPOCH`
/// (seconds) so archived outputs can be byte-reproducible.
pub fn generated_at() -> String {
    let stamped = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0));
    let dt = stamped.unwrap_or_else(chrono::Utc::now);
    dt.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub const SCHEMA_VERSION: &str = "1";

/// Configuration echo embedded in every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ConfigEcho {
    pub n_qubits: usize,
    pub c1: f64,
    pub trials: usize,
    pub strategy: Strategy,
    pub purify: bool,
    pub grid_size: usize,
    pub master_seed: u64,
    pub weighting: Weighting,
}

impl ConfigEcho {
    // Worker count is deliberately not echoed: results are independent of it,
    // so files stay byte-identical across worker settings.
    pub fn new(cfg: &ScenarioConfig) -> Self {
        Self {
            n_qubits: cfg.n_qubits,
            c1: round_sig(cfg.c1),
            trials: cfg.trials,
            strategy: cfg.strategy,
            purify: cfg.purify,
            grid_size: cfg.grid_size,
            master_seed: cfg.master_seed,
            weighting: cfg.weighting,
        }
    }

    /// Reconstructs the scenario this echo describes.
    pub fn to_config(&self) -> ScenarioConfig {
        ScenarioConfig {
            n_qubits: self.n_qubits,
            c1: self.c1,
            trials: self.trials,
            strategy: self.strategy,
            purify: self.purify,
            grid_size: self.grid_size,
            master_seed: self.master_seed,
            weighting: self.weighting,
        }
    }
}

/// JSON report for a single scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunReport {
    pub schema_version: String,
    pub generated_at: String,
    pub command: String,
    pub config: ConfigEcho,
    pub result: RunResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunResult {
    pub mean_fidelity: f64,
    pub std_error: f64,
    pub step_curve: Vec<f64>,
    pub step_std_errors: Vec<f64>,
}

impl RunReport {
    pub fn new(cfg: &ScenarioConfig, summary: &ScenarioSummary, generated_at: String) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            generated_at,
            command: "run".to_string(),
            config: ConfigEcho::new(cfg),
            result: RunResult {
                mean_fidelity: round_sig(summary.mean_fidelity),
                std_error: round_sig(summary.std_error),
                step_curve: summary.mean_step_fidelities.iter().copied().map(round_sig).collect(),
                step_std_errors: summary.step_std_errors.iter().copied().map(round_sig).collect(),
            },
        }
    }

    pub fn render(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("bad run report: {e}")))
    }
}

/// Pinned sweep CSV header.
pub const SWEEP_HEADER: &str = "c1,strategy,purify,n_qubits,trials,mean_fidelity,std_error,seed";
/// Pinned trace CSV header.
pub const TRACE_HEADER: &str = "n,pipeline,mean_fidelity,std_error";
/// Stats table header.
pub const STATS_HEADER: &str = "m,p_m,f_m";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SweepMeta {
    pub schema_version: String,
    pub generated_at: String,
    pub command: String,
    pub config: ConfigEcho,
    pub compare: CompareMode,
    pub c1_values: Vec<f64>,
}

fn meta_line<T: Serialize>(meta: &T) -> String {
    format!("# meta: {}", serde_json::to_string(meta).expect("meta serializes"))
}

fn parse_meta_line<'a, T: Deserialize<'a>>(line: &'a str, what: &str) -> Result<T> {
    let payload = line
        .strip_prefix("# meta: ")
        .ok_or_else(|| Error::invalid(format!("{what}: missing meta line")))?;
    serde_json::from_str(payload).map_err(|e| Error::invalid(format!("{what}: bad meta: {e}")))
}

/// Renders a sweep as CSV: one meta comment, the pinned header, then one row
/// per scenario cell in sweep order.
pub fn render_sweep_csv(meta: &SweepMeta, rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(&meta_line(meta));
    out.push('\n');
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt_sig(row.c1),
            row.strategy,
            row.purify,
            row.n_qubits,
            row.trials,
            fmt_sig(row.mean_fidelity),
            fmt_sig(row.std_error),
            row.seed,
        ));
    }
    out
}

pub fn parse_sweep_csv(text: &str) -> Result<(SweepMeta, Vec<SweepRow>)> {
    let mut lines = text.lines();
    let meta = parse_meta_line(
        lines.next().ok_or_else(|| Error::invalid("sweep csv: empty file"))?,
        "sweep csv",
    )?;
    let header = lines.next().ok_or_else(|| Error::invalid("sweep csv: missing header"))?;
    if header != SWEEP_HEADER {
        return Err(Error::invalid(format!("sweep csv: unexpected header `{header}`")));
    }
    let mut rows = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::invalid(format!("sweep csv: malformed row `{line}`")));
        }
        rows.push(SweepRow {
            c1: parse_f64(fields[0], "c1")?,
            strategy: parse_strategy(fields[1])?,
            purify: parse_bool(fields[2], "purify")?,
            n_qubits: parse_usize(fields[3], "n_qubits")?,
            trials: parse_usize(fields[4], "trials")?,
            mean_fidelity: parse_f64(fields[5], "mean_fidelity")?,
            std_error: parse_f64(fields[6], "std_error")?,
            seed: parse_u64(fields[7], "seed")?,
        });
    }
    Ok((meta, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TraceMeta {
    pub schema_version: String,
    pub generated_at: String,
    pub command: String,
    pub config: ConfigEcho,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub pipeline: String,
    pub mean_fidelity: f64,
    pub std_error: f64,
}

/// Flattens paired pipeline curves into trace rows: the purified block
/// (n = 1..N) first, then the unpurified block.
pub fn trace_rows(curves: &TraceCurves) -> Vec<TraceRow> {
    let mut rows = Vec::new();
    for (name, summary) in [("purified", &curves.purified), ("unpurified", &curves.unpurified)] {
        for (i, (&mean, &se)) in summary
            .mean_step_fidelities
            .iter()
            .zip(&summary.step_std_errors)
            .enumerate()
        {
            rows.push(TraceRow {
                n: i + 1,
                pipeline: name.to_string(),
                mean_fidelity: round_sig(mean),
                std_error: round_sig(se),
            });
        }
    }
    rows
}

pub fn render_trace_csv(meta: &TraceMeta, rows: &[TraceRow]) -> String {
    let mut out = String::new();
    out.push_str(&meta_line(meta));
    out.push('\n');
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.n,
            row.pipeline,
            fmt_sig(row.mean_fidelity),
            fmt_sig(row.std_error),
        ));
    }
    out
}

pub fn parse_trace_csv(text: &str) -> Result<(TraceMeta, Vec<TraceRow>)> {
    let mut lines = text.lines();
    let meta = parse_meta_line(
        lines.next().ok_or_else(|| Error::invalid("trace csv: empty file"))?,
        "trace csv",
    )?;
    let header = lines.next().ok_or_else(|| Error::invalid("trace csv: missing header"))?;
    if header != TRACE_HEADER {
        return Err(Error::invalid(format!("trace csv: unexpected header `{header}`")));
    }
    let mut rows = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::invalid(format!("trace csv: malformed row `{line}`")));
        }
        let pipeline = fields[1];
        if pipeline != "purified" && pipeline != "unpurified" {
            return Err(Error::invalid(format!("trace csv: unknown pipeline `{pipeline}`")));
        }
        rows.push(TraceRow {
            n: parse_usize(fields[0], "n")?,
            pipeline: pipeline.to_string(),
            mean_fidelity: parse_f64(fields[2], "mean_fidelity")?,
            std_error: parse_f64(fields[3], "std_error")?,
        });
    }
    Ok((meta, rows))
}

/// Purification statistics table: size probabilities and fidelities plus
/// their sums for the improvement inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub n: usize,
    pub c1: f64,
    /// Rows (M, p_M, f_M) for sizes with positive probability, ascending.
    pub rows: Vec<(usize, f64, f64)>,
    pub prob_sum: f64,
    pub mean_fidelity: f64,
}

/// Computes the purification statistics for an even ensemble size.
pub fn stats_report(n: usize, c1: f64) -> Result<StatsReport> {
    if n % 2 != 0 {
        return Err(Error::invalid(format!("ensemble size {n} must be even")));
    }
    let channel = ChannelSpec::new(c1)?;
    let dist = purification_distribution(n, &channel)?;
    let rows: Vec<(usize, f64, f64)> = dist
        .iter()
        .filter(|&(_, p)| p > 0.0)
        .map(|(m, p)| (m, round_sig(p), round_sig(single_qubit_fidelity(m, &channel))))
        .collect();
    Ok(StatsReport {
        n,
        c1: round_sig(c1),
        rows,
        prob_sum: round_sig(dist.probs().iter().sum()),
        mean_fidelity: round_sig(mean_purified_fidelity(&dist)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StatsMeta {
    pub schema_version: String,
    pub generated_at: String,
    pub command: String,
    pub n_qubits: usize,
    pub c1: f64,
}

pub fn render_stats(report: &StatsReport, generated_at: String) -> String {
    let meta = StatsMeta {
        schema_version: SCHEMA_VERSION.to_string(),
        generated_at,
        command: "stats".to_string(),
        n_qubits: report.n,
        c1: report.c1,
    };
    let mut out = String::new();
    out.push_str(&meta_line(&meta));
    out.push('\n');
    out.push_str(STATS_HEADER);
    out.push('\n');
    for &(m, p, f) in &report.rows {
        out.push_str(&format!("{m},{},{}\n", fmt_sig(p), fmt_sig(f)));
    }
    out.push_str(&format!("# sum_p_m = {}\n", fmt_sig(report.prob_sum)));
    out.push_str(&format!("# mean_fidelity = {}\n", fmt_sig(report.mean_fidelity)));
    out.push_str(&format!("# c1 = {}\n", fmt_sig(report.c1)));
    out
}

/// Evenly spaced channel-strength grid, each value rounded to the emitted
/// precision so simulated values and their CSV echoes are identical.
pub fn c1_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::invalid("sweep needs at least one step"));
    }
    if !(min.is_finite() && max.is_finite()) || min > max {
        return Err(Error::invalid(format!("bad channel range [{min}, {max}]")));
    }
    if steps == 1 {
        if min != max {
            return Err(Error::invalid("a single-step sweep needs min = max"));
        }
        return Ok(vec![round_sig(min)]);
    }
    Ok((0..steps)
        .map(|i| round_sig(min + (max - min) * i as f64 / (steps - 1) as f64))
        .collect())
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::invalid(format!("bad {what} value `{s}`")))
}

fn parse_usize(s: &str, what: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::invalid(format!("bad {what} value `{s}`")))
}

fn parse_u64(s: &str, what: &str) -> Result<u64> {
    s.parse().map_err(|_| Error::invalid(format!("bad {what} value `{s}`")))
}

fn parse_bool(s: &str, what: &str) -> Result<bool> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::invalid(format!("bad {what} value `{s}`"))),
    }
}

fn parse_strategy(s: &str) -> Result<Strategy> {
    match s {
        "adaptive" => Ok(Strategy::Adaptive),
        "random" => Ok(Strategy::Random),
        _ => Err(Error::invalid(format!("bad strategy value `{s}`"))),
    }
}
