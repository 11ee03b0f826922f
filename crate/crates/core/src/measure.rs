//! Sequential projective measurements on separable and entangled registers.
//!
//! Both ensemble types expose the same two operations: the probability of
//! outcome 1 along a direction, and a sampling `measure` that consumes one
//! qubit. The separable ensemble uses the closed-form probability
//! `(1 + (c1 - c0) m.n)/2` of a depolarized qubit; the entangled ensemble
//! contracts its dense conditional density operator with the direction
//! projector and renormalizes, so measuring one qubit updates the state of
//! the rest. [`exhaustive_outcome_tree`] enumerates every outcome sequence of
//! a short measurement plan and is the reference the samplers are tested
//! against.

use rand::Rng;

use crate::purify::{ChannelSpec, PurifiedState};
use crate::qubit::PureQubit;
use crate::state::{DensityOperator, StateVector, MAX_QUBITS};
use crate::{Error, Result};

/// Probability below which a measurement branch is treated as unreachable:
/// no conditional state is produced for it and the sampler never selects it.
pub const PROB_FLOOR: f64 = 1e-14;

/// One measurement event: the direction probed and the outcome found.
/// `outcome` is `true` when the qubit was found along `direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementStep {
    pub direction: PureQubit,
    pub outcome: bool,
}

/// Ordered history of the measurement events in one estimation run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeasurementRecord {
    steps: Vec<MeasurementStep>,
}

impl MeasurementRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, direction: PureQubit, outcome: bool) {
        self.steps.push(MeasurementStep { direction, outcome });
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[MeasurementStep] {
        &self.steps
    }
}

/// Samples one outcome given the probability of outcome 1, steering rounding
/// dust away from branches below [`PROB_FLOOR`] so the conditional state is
/// always well defined.
fn sample_outcome<R: Rng + ?Sized>(p1: f64, rng: &mut R) -> bool {
    let p1 = p1.clamp(0.0, 1.0);
    let u: f64 = rng.gen();
    let mut outcome = u < p1;
    if outcome && p1 < PROB_FLOOR {
        outcome = false;
    }
    if !outcome && 1.0 - p1 < PROB_FLOOR {
        outcome = true;
    }
    outcome
}

/// Finite stock of identical, uncorrelated depolarized qubits.
///
/// Measuring one qubit leaves the others untouched, so only a countdown and
/// the shared single-qubit parameters are stored.
#[derive(Debug, Clone)]
pub struct SeparableEnsemble {
    axis: PureQubit,
    channel: ChannelSpec,
    remaining: usize,
}

impl SeparableEnsemble {
    pub fn new(n: usize, axis: &PureQubit, channel: &ChannelSpec) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::invalid(format!(
                "ensemble size {n} outside 1..={MAX_QUBITS}"
            )));
        }
        Ok(Self {
            axis: *axis,
            channel: *channel,
            remaining: n,
        })
    }

    pub fn qubits_left(&self) -> usize {
        self.remaining
    }

    /// Probability of outcome 1 along `direction`:
    /// `(1 + (c1 - c0) m.n)/2` with `m`, `n` the direction and axis Bloch
    /// vectors.
    pub fn outcome_probability(&self, direction: &PureQubit) -> f64 {
        let m = direction.bloch_vector();
        let n = self.axis.bloch_vector();
        let dot = m[0] * n[0] + m[1] * n[1] + m[2] * n[2];
        (0.5 * (1.0 + self.channel.contrast() * dot)).clamp(0.0, 1.0)
    }

    /// Measures one qubit along `direction`, consuming it.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        direction: &PureQubit,
        rng: &mut R,
    ) -> Result<bool> {
        if self.remaining == 0 {
            return Err(Error::invalid("separable ensemble is exhausted"));
        }
        self.remaining -= 1;
        Ok(sample_outcome(self.outcome_probability(direction), rng))
    }
}

/// Entangled register measured one qubit at a time.
///
/// Holds the trace-one conditional density operator of the unmeasured
/// qubits; each measurement contracts the most significant qubit with the
/// outcome projector and renormalizes. The register is symmetric under qubit
/// exchange for every state produced by the distillation protocol, so which
/// physical qubit is "first" is immaterial.
#[derive(Debug, Clone)]
pub struct EntangledEnsemble {
    state: DensityOperator,
}

impl EntangledEnsemble {
    /// Wraps a density operator with unit trace (within `1e-8`); the stored
    /// state is renormalized exactly.
    pub fn new(state: DensityOperator) -> Result<Self> {
        if state.qubits() == 0 {
            return Err(Error::invalid("entangled ensemble needs at least one qubit"));
        }
        let trace = state.trace();
        if (trace - 1.0).abs() > 1e-8 {
            return Err(Error::invalid(format!(
                "density operator trace {trace} is not 1"
            )));
        }
        let mut state = state;
        state.scale(1.0 / trace);
        Ok(Self { state })
    }

    pub fn from_purified(purified: &PurifiedState) -> Self {
        Self {
            state: purified.density(),
        }
    }

    pub fn qubits_left(&self) -> usize {
        self.state.qubits()
    }

    /// Conditional state of the unmeasured qubits (trace one).
    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    /// Probability of outcome 1 along `direction` for the next measurement.
    pub fn outcome_probability(&self, direction: &PureQubit) -> Result<f64> {
        if self.state.qubits() == 0 {
            return Err(Error::invalid("entangled ensemble is exhausted"));
        }
        let (p, _) = self
            .state
            .apply_single_qubit_projector(0, &StateVector::from_qubit(direction))?;
        Ok(p.clamp(0.0, 1.0))
    }

    /// Measures one qubit along `direction`, collapsing the rest of the
    /// register onto the observed branch.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        direction: &PureQubit,
        rng: &mut R,
    ) -> Result<bool> {
        let p1 = self.outcome_probability(direction)?;
        let outcome = sample_outcome(p1, rng);
        let projector = if outcome {
            StateVector::from_qubit(direction)
        } else {
            StateVector::orthogonal_to(direction)
        };
        let (p, conditional) = self.state.apply_single_qubit_projector(0, &projector)?;
        let Some(mut conditional) = conditional else {
            return Err(Error::UnreachableBranch { probability: p });
        };
        conditional.scale(1.0 / p);
        self.state = conditional;
        Ok(outcome)
    }
}

/// One leaf of the outcome tree: a full outcome sequence and its joint
/// probability.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomePath {
    pub outcomes: Vec<bool>,
    pub probability: f64,
}

/// Enumerates all `2^k` outcome sequences of measuring `directions` in order
/// on `initial`, with exact joint probabilities from the dense collapse
/// chain.
///
/// Paths are returned in lexicographic order with outcome 0 before outcome 1
/// at every step. Branches whose probability falls below [`PROB_FLOOR`] are
/// reported with probability zero and are not split further (their suffixes
/// are filled in to keep all `2^k` paths present). Plans are capped at four
/// measurements; the tree doubles per step.
pub fn exhaustive_outcome_tree(
    initial: &DensityOperator,
    directions: &[PureQubit],
) -> Result<Vec<OutcomePath>> {
    const MAX_TREE_DEPTH: usize = 4;
    if directions.is_empty() {
        return Err(Error::invalid("outcome tree needs at least one direction"));
    }
    if directions.len() > MAX_TREE_DEPTH {
        return Err(Error::invalid(format!(
            "outcome tree supports at most {MAX_TREE_DEPTH} measurements, got {}",
            directions.len()
        )));
    }
    if directions.len() > initial.qubits() {
        return Err(Error::invalid(format!(
            "cannot measure {} times on {} qubits",
            directions.len(),
            initial.qubits()
        )));
    }
    let trace = initial.trace();
    if (trace - 1.0).abs() > 1e-8 {
        return Err(Error::invalid(format!(
            "density operator trace {trace} is not 1"
        )));
    }
    let mut normalized = initial.clone();
    normalized.scale(1.0 / trace);
    let mut paths = Vec::with_capacity(1 << directions.len());
    let mut prefix = Vec::with_capacity(directions.len());
    walk_outcomes(&normalized, directions, 1.0, &mut prefix, &mut paths)?;
    Ok(paths)
}

fn walk_outcomes(
    state: &DensityOperator,
    directions: &[PureQubit],
    joint: f64,
    prefix: &mut Vec<bool>,
    paths: &mut Vec<OutcomePath>,
) -> Result<()> {
    let depth = prefix.len();
    if depth == directions.len() {
        paths.push(OutcomePath {
            outcomes: prefix.clone(),
            probability: joint,
        });
        return Ok(());
    }
    let dir = &directions[depth];
    for outcome in [false, true] {
        let projector = if outcome {
            StateVector::from_qubit(dir)
        } else {
            StateVector::orthogonal_to(dir)
        };
        let (p, conditional) = state.apply_single_qubit_projector(0, &projector)?;
        prefix.push(outcome);
        match conditional {
            Some(mut conditional) if p >= PROB_FLOOR => {
                conditional.scale(1.0 / p);
                walk_outcomes(&conditional, directions, joint * p, prefix, paths)?;
            }
            _ => {
                // Unreachable branch: emit all suffixes with probability 0.
                fill_zero_paths(directions.len(), prefix, paths);
            }
        }
        prefix.pop();
    }
    Ok(())
}

fn fill_zero_paths(total: usize, prefix: &mut Vec<bool>, paths: &mut Vec<OutcomePath>) {
    if prefix.len() == total {
        paths.push(OutcomePath {
            outcomes: prefix.clone(),
            probability: 0.0,
        });
        return;
    }
    for outcome in [false, true] {
        prefix.push(outcome);
        fill_zero_paths(total, prefix, paths);
        prefix.pop();
    }
}
