//! Monte Carlo driver for full estimation experiments.
//!
//! A trial samples a true direction uniformly, feeds measurement outcomes
//! from either the separable ensemble or the purified register into the
//! Bayesian estimator, and records the fidelity of the running estimate
//! after every measurement step. Scenarios aggregate many trials into mean
//! fidelities with standard errors; sweeps repeat that over a range of
//! channel strengths.
//!
//! Determinism: every trial derives its randomness from the master seed and
//! its own trial index through separate counter-mode RNG streams, so results
//! are bitwise reproducible regardless of worker count or scheduling, and
//! compared pipelines see identical true states per trial index (common
//! random numbers).

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bayes::{
    estimation_fidelity, final_estimate, select_direction_adaptive, select_direction_random,
    Posterior, SphereGrid,
};
use crate::measure::{EntangledEnsemble, SeparableEnsemble};
use crate::purify::{purification_distribution, purified_state, ChannelSpec};
use crate::qubit::PureQubit;
use crate::state::MAX_QUBITS;
use crate::{Error, Result};

/// How the next probe direction is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Maximize the expected outcome entropy under the current posterior.
    Adaptive,
    /// Ignore the posterior and draw directions uniformly.
    Random,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Adaptive => "adaptive",
            Strategy::Random => "random",
        })
    }
}

/// How purified register sizes enter the average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// Run every register size M and average traces by its probability.
    Exact,
    /// Draw one register size per trial from the size distribution.
    Sampled,
}

impl std::fmt::Display for Weighting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Weighting::Exact => "exact",
            Weighting::Sampled => "sampled",
        })
    }
}

/// Full description of one experiment scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    /// Ensemble size per trial; even, between 2 and 12.
    pub n_qubits: usize,
    /// Larger eigenvalue of the depolarized qubit, in `[1/2, 1]`.
    pub c1: f64,
    /// Number of independent trials.
    pub trials: usize,
    pub strategy: Strategy,
    /// Whether qubits pass through the purification step before measurement.
    pub purify: bool,
    /// Posterior grid resolution.
    pub grid_size: usize,
    /// Master seed; with the trial index it determines all randomness.
    pub master_seed: u64,
    pub weighting: Weighting,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_qubits: 6,
            c1: 0.75,
            trials: 40_000,
            strategy: Strategy::Adaptive,
            purify: false,
            grid_size: 1024,
            master_seed: 1,
            weighting: Weighting::Exact,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 2 || self.n_qubits > MAX_QUBITS || self.n_qubits % 2 != 0 {
            return Err(Error::invalid(format!(
                "ensemble size {} must be even and between 2 and {MAX_QUBITS}",
                self.n_qubits
            )));
        }
        ChannelSpec::new(self.c1)?;
        if self.trials == 0 {
            return Err(Error::invalid("trial count must be at least 1"));
        }
        if self.grid_size < 2 {
            return Err(Error::invalid(format!(
                "grid size {} below minimum 2",
                self.grid_size
            )));
        }
        Ok(())
    }
}

/// Everything recorded about one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTrace {
    pub truth: PureQubit,
    /// Register sizes and probabilities averaged over (exact purified mode).
    pub branch_weights: Option<Vec<(usize, f64)>>,
    /// Register size drawn for this trial (sampled purified mode).
    pub sampled_m: Option<usize>,
    /// Fidelity of the running estimate after measurement step `n + 1`;
    /// always `n_qubits` entries, carrying the last value forward when a
    /// branch measures fewer qubits.
    pub step_fidelities: Vec<f64>,
    /// Equals the last step fidelity.
    pub final_fidelity: f64,
}

/// Aggregates over all trials of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSummary {
    pub trials: usize,
    pub mean_fidelity: f64,
    /// Sample standard deviation of final fidelities over sqrt(trials).
    pub std_error: f64,
    /// Pointwise mean of the per-step fidelity curves.
    pub mean_step_fidelities: Vec<f64>,
    /// Per-step standard errors for the curve above.
    pub step_std_errors: Vec<f64>,
}

/// One line of a sweep: a scenario variant at one channel strength.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub c1: f64,
    pub strategy: Strategy,
    pub purify: bool,
    pub n_qubits: usize,
    pub trials: usize,
    pub mean_fidelity: f64,
    pub std_error: f64,
    pub seed: u64,
}

/// Which scenario pair a sweep compares at each channel strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompareMode {
    /// Purified vs unpurified, same strategy.
    Purify,
    /// Adaptive vs random directions, same purification setting.
    Strategy,
}

/// Paired step-fidelity curves for the purified and unpurified pipelines
/// under a common seed.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceCurves {
    pub purified: ScenarioSummary,
    pub unpurified: ScenarioSummary,
}

// Per-trial RNG streams. Each trial owns four independent counter-mode
// streams so adding or removing draws in one lane never shifts another, and
// pipelines compared under one seed consume identical truth streams.
const LANE_TRUTH: u64 = 0;
const LANE_UNPURIFIED: u64 = 1;
const LANE_PURIFIED: u64 = 2;
const LANE_DIRECTION: u64 = 3;
const LANES: u64 = 4;

fn lane_rng(master_seed: u64, trial: usize, lane: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((trial as u64).wrapping_mul(LANES).wrapping_add(lane));
    rng
}

/// Draws a true state uniformly over the Bloch sphere.
pub fn sample_true_state<R: Rng + ?Sized>(rng: &mut R) -> PureQubit {
    PureQubit::sample_uniform(rng)
}

fn select_direction<R: Rng + ?Sized>(
    strategy: Strategy,
    posterior: &Posterior,
    rng: &mut R,
) -> PureQubit {
    match strategy {
        Strategy::Adaptive => select_direction_adaptive(posterior),
        Strategy::Random => select_direction_random(rng),
    }
}

/// Runs one trial without purification: `n_qubits` sequential measurements
/// on independent depolarized copies of the true state.
pub fn run_trial_unpurified<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    truth: PureQubit,
    grid: &Arc<SphereGrid>,
    outcome_rng: &mut R,
    direction_rng: &mut R,
) -> Result<TrialTrace> {
    let channel = ChannelSpec::new(cfg.c1)?;
    let mut ensemble = SeparableEnsemble::new(cfg.n_qubits, &truth, &channel)?;
    let mut posterior = Posterior::uniform(grid.clone());
    let mut step_fidelities = Vec::with_capacity(cfg.n_qubits);
    for _ in 0..cfg.n_qubits {
        let direction = select_direction(cfg.strategy, &posterior, direction_rng);
        let outcome = ensemble.measure(&direction, outcome_rng)?;
        posterior.update(&direction, outcome)?;
        let estimate = final_estimate(&posterior);
        step_fidelities.push(estimation_fidelity(&estimate, &truth));
    }
    let final_fidelity = *step_fidelities.last().expect("n_qubits >= 2");
    Ok(TrialTrace {
        truth,
        branch_weights: None,
        sampled_m: None,
        step_fidelities,
        final_fidelity,
    })
}

/// Measures one purified register of `m` qubits and returns the fidelity of
/// the running estimate after each of the `m` steps.
fn run_purified_branch<R: Rng + ?Sized>(
    m: usize,
    cfg: &ScenarioConfig,
    truth: &PureQubit,
    grid: &Arc<SphereGrid>,
    channel: &ChannelSpec,
    outcome_rng: &mut R,
    direction_rng: &mut R,
) -> Result<Vec<f64>> {
    let state = purified_state(m, truth, channel)?;
    let mut ensemble = EntangledEnsemble::from_purified(&state);
    let mut posterior = Posterior::uniform(grid.clone());
    let mut fidelities = Vec::with_capacity(m);
    for _ in 0..m {
        let direction = select_direction(cfg.strategy, &posterior, direction_rng);
        let outcome = ensemble.measure(&direction, outcome_rng)?;
        posterior.update(&direction, outcome)?;
        let estimate = final_estimate(&posterior);
        fidelities.push(estimation_fidelity(&estimate, truth));
    }
    Ok(fidelities)
}

/// Extends a branch's step-fidelity curve to the full `n_qubits` length by
/// carrying the final estimate forward; an empty branch (M = 0) contributes
/// the fixed prior estimate at every step.
fn branch_fidelity_at(branch: &[f64], step: usize, prior_fidelity: f64) -> f64 {
    match branch.len() {
        0 => prior_fidelity,
        len if step < len => branch[step],
        len => branch[len - 1],
    }
}

/// Runs one trial with purification.
///
/// Exact weighting measures every register size `M in {0, 2, ..., N}` with
/// positive probability and averages the per-step curves with weights `p_M`
/// (zero-probability sizes contribute nothing and are skipped). Sampled
/// weighting draws one `M` from the size distribution and runs that branch
/// alone. The M = 0 branch performs no measurements, so its estimate is the
/// prior's fixed starting point.
pub fn run_trial_purified<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    truth: PureQubit,
    grid: &Arc<SphereGrid>,
    outcome_rng: &mut R,
    direction_rng: &mut R,
) -> Result<TrialTrace> {
    let channel = ChannelSpec::new(cfg.c1)?;
    let dist = purification_distribution(cfg.n_qubits, &channel)?;
    let prior_estimate = final_estimate(&Posterior::uniform(grid.clone()));
    let prior_fidelity = estimation_fidelity(&prior_estimate, &truth);
    let mut step_fidelities = vec![0.0; cfg.n_qubits];
    let mut branch_weights = None;
    let mut sampled_m = None;
    match cfg.weighting {
        Weighting::Exact => {
            let mut used = Vec::new();
            for (m, p) in dist.iter() {
                if p == 0.0 {
                    continue;
                }
                let branch = if m == 0 {
                    Vec::new()
                } else {
                    run_purified_branch(m, cfg, &truth, grid, &channel, outcome_rng, direction_rng)?
                };
                for (step, acc) in step_fidelities.iter_mut().enumerate() {
                    *acc += p * branch_fidelity_at(&branch, step, prior_fidelity);
                }
                used.push((m, p));
            }
            branch_weights = Some(used);
        }
        Weighting::Sampled => {
            let m = dist.sample(outcome_rng);
            let branch = if m == 0 {
                Vec::new()
            } else {
                run_purified_branch(m, cfg, &truth, grid, &channel, outcome_rng, direction_rng)?
            };
            for (step, acc) in step_fidelities.iter_mut().enumerate() {
                *acc = branch_fidelity_at(&branch, step, prior_fidelity);
            }
            sampled_m = Some(m);
        }
    }
    let final_fidelity = *step_fidelities.last().expect("n_qubits >= 2");
    Ok(TrialTrace {
        truth,
        branch_weights,
        sampled_m,
        step_fidelities,
        final_fidelity,
    })
}

/// Runs the trial with the index-derived RNG streams for its pipeline.
pub fn run_trial(
    cfg: &ScenarioConfig,
    grid: &Arc<SphereGrid>,
    trial_index: usize,
) -> Result<TrialTrace> {
    let truth = sample_true_state(&mut lane_rng(cfg.master_seed, trial_index, LANE_TRUTH));
    let mut direction_rng = lane_rng(cfg.master_seed, trial_index, LANE_DIRECTION);
    if cfg.purify {
        let mut outcome_rng = lane_rng(cfg.master_seed, trial_index, LANE_PURIFIED);
        run_trial_purified(cfg, truth, grid, &mut outcome_rng, &mut direction_rng)
    } else {
        let mut outcome_rng = lane_rng(cfg.master_seed, trial_index, LANE_UNPURIFIED);
        run_trial_unpurified(cfg, truth, grid, &mut outcome_rng, &mut direction_rng)
    }
}

fn mean_and_std_error(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    (mean, sd / (n as f64).sqrt())
}

/// Runs all trials of a scenario and aggregates them.
///
/// Trials are distributed over the ambient worker pool; the reduction runs
/// over the trial-index-ordered results, so the summary is identical for any
/// worker count.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioSummary> {
    cfg.validate()?;
    let grid = Arc::new(SphereGrid::fibonacci(cfg.grid_size)?);
    let traces = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, &grid, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(&traces, cfg.n_qubits))
}

fn summarize(traces: &[TrialTrace], n_qubits: usize) -> ScenarioSummary {
    let n = traces.len();
    let (mean_fidelity, std_error) =
        mean_and_std_error(traces.iter().map(|t| t.final_fidelity), n);
    let mut mean_step_fidelities = Vec::with_capacity(n_qubits);
    let mut step_std_errors = Vec::with_capacity(n_qubits);
    for step in 0..n_qubits {
        let (mean, se) = mean_and_std_error(traces.iter().map(|t| t.step_fidelities[step]), n);
        mean_step_fidelities.push(mean);
        step_std_errors.push(se);
    }
    ScenarioSummary {
        trials: n,
        mean_fidelity,
        std_error,
        mean_step_fidelities,
        step_std_errors,
    }
}

/// Sweeps the channel strength, running the compared scenario pair at every
/// value under a common master seed (shared truth streams per trial index).
/// Rows are ordered by `c1` ascending; within one `c1` the purified (or
/// adaptive) variant comes first.
pub fn sweep_c1(
    cfg: &ScenarioConfig,
    c1_values: &[f64],
    compare: CompareMode,
) -> Result<Vec<SweepRow>> {
    if c1_values.is_empty() {
        return Err(Error::invalid("sweep needs at least one channel value"));
    }
    let mut rows = Vec::with_capacity(c1_values.len() * 2);
    for &c1 in c1_values {
        let variants: [ScenarioConfig; 2] = match compare {
            CompareMode::Purify => [
                ScenarioConfig { c1, purify: true, ..*cfg },
                ScenarioConfig { c1, purify: false, ..*cfg },
            ],
            CompareMode::Strategy => [
                ScenarioConfig { c1, strategy: Strategy::Adaptive, ..*cfg },
                ScenarioConfig { c1, strategy: Strategy::Random, ..*cfg },
            ],
        };
        for variant in variants {
            let summary = run_scenario(&variant)?;
            rows.push(SweepRow {
                c1,
                strategy: variant.strategy,
                purify: variant.purify,
                n_qubits: variant.n_qubits,
                trials: variant.trials,
                mean_fidelity: summary.mean_fidelity,
                std_error: summary.std_error,
                seed: variant.master_seed,
            });
        }
    }
    Ok(rows)
}

/// Runs the purified and unpurified pipelines under one seed and returns
/// both mean step-fidelity curves.
pub fn fidelity_trace(cfg: &ScenarioConfig) -> Result<TraceCurves> {
    let purified = run_scenario(&ScenarioConfig { purify: true, ..*cfg })?;
    let unpurified = run_scenario(&ScenarioConfig { purify: false, ..*cfg })?;
    Ok(TraceCurves { purified, unpurified })
}
