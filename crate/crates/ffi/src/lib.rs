//! C ABI over the purification and estimation library.
//!
//! Conventions: every function returns a [`PurisimStatus`]; results travel
//! through caller-owned out-pointers; scenario state lives behind an opaque
//! handle created by [`purisim_scenario_new`] and released by
//! [`purisim_scenario_free`]. No call unwinds across the boundary: panics
//! are caught and reported as `PURISIM_STATUS_PANIC`.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use purisim::error::Error;
use purisim::harness::{run_scenario, ScenarioConfig, Strategy, Weighting};
use purisim::purify::{
    mean_purified_fidelity, purification_distribution, single_qubit_fidelity, ChannelSpec,
};

/// Outcome of an FFI call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PurisimStatus {
    /// The call succeeded.
    PurisimStatusOk = 0,
    /// A required pointer argument was null.
    PurisimStatusNullPointer = 1,
    /// An argument was outside its documented domain.
    PurisimStatusInvalidArgument = 2,
    /// A numerical invariant failed during evaluation.
    PurisimStatusNumerical = 3,
    /// The library panicked; the handle is still safe to free.
    PurisimStatusPanic = 4,
}

use PurisimStatus::*;

/// Probe-direction strategy selector for [`purisim_scenario_configure`].
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PurisimStrategy {
    /// Maximize expected information gain over the posterior grid.
    PurisimStrategyAdaptive = 0,
    /// Draw probe directions uniformly at random.
    PurisimStrategyRandom = 1,
}

/// Register-size weighting selector for [`purisim_scenario_configure`].
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PurisimWeighting {
    /// Average every reachable register size by its exact probability.
    PurisimWeightingExact = 0,
    /// Sample one register size per trial.
    PurisimWeightingSampled = 1,
}

/// Opaque scenario handle; create with [`purisim_scenario_new`].
pub struct PurisimScenario {
    config: ScenarioConfig,
}

fn status_of(err: &Error) -> PurisimStatus {
    match err {
        Error::InvalidArgument(_) => PurisimStatusInvalidArgument,
        Error::UnreachableBranch { .. } | Error::Numerical(_) => PurisimStatusNumerical,
    }
}

fn guarded(body: impl FnOnce() -> PurisimStatus) -> PurisimStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => PurisimStatusPanic,
    }
}

/// Library version as a static NUL-terminated string; never null.
#[no_mangle]
pub extern "C" fn purisim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Allocates a scenario handle with default settings (six qubits, channel
/// weight 0.75, adaptive strategy, purification off, exact weighting,
/// grid 1024, seed 1, forty thousand trials). Writes the handle to `out`.
#[no_mangle]
pub extern "C" fn purisim_scenario_new(out: *mut *mut PurisimScenario) -> PurisimStatus {
    guarded(|| {
        if out.is_null() {
            return PurisimStatusNullPointer;
        }
        let handle = Box::new(PurisimScenario { config: ScenarioConfig::default() });
        unsafe { *out = Box::into_raw(handle) };
        PurisimStatusOk
    })
}

/// Releases a scenario handle. Null is a no-op.
#[no_mangle]
pub extern "C" fn purisim_scenario_free(scenario: *mut PurisimScenario) {
    if !scenario.is_null() {
        drop(unsafe { Box::from_raw(scenario) });
    }
}

/// Replaces every setting of the scenario, validating the combination.
/// On a validation failure the previous settings are kept.
#[no_mangle]
pub extern "C" fn purisim_scenario_configure(
    scenario: *mut PurisimScenario,
    n_qubits: usize,
    c1: f64,
    trials: usize,
    strategy: PurisimStrategy,
    purify: bool,
    weighting: PurisimWeighting,
    grid_size: usize,
    master_seed: u64,
) -> PurisimStatus {
    guarded(|| {
        let Some(handle) = (unsafe { scenario.as_mut() }) else {
            return PurisimStatusNullPointer;
        };
        let config = ScenarioConfig {
            n_qubits,
            c1,
            trials,
            strategy: match strategy {
                PurisimStrategy::PurisimStrategyAdaptive => Strategy::Adaptive,
                PurisimStrategy::PurisimStrategyRandom => Strategy::Random,
            },
            purify,
            weighting: match weighting {
                PurisimWeighting::PurisimWeightingExact => Weighting::Exact,
                PurisimWeighting::PurisimWeightingSampled => Weighting::Sampled,
            },
            grid_size,
            master_seed,
        };
        match config.validate() {
            Ok(()) => {
                handle.config = config;
                PurisimStatusOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Runs the configured scenario. `mean_fidelity` and `std_error` are
/// required. `step_curve`, when not null, must hold `step_len` doubles with
/// `step_len` equal to the configured qubit count; it receives the mean
/// estimation fidelity after each measurement.
#[no_mangle]
pub extern "C" fn purisim_scenario_run(
    scenario: *const PurisimScenario,
    mean_fidelity: *mut f64,
    std_error: *mut f64,
    step_curve: *mut f64,
    step_len: usize,
) -> PurisimStatus {
    guarded(|| {
        let Some(handle) = (unsafe { scenario.as_ref() }) else {
            return PurisimStatusNullPointer;
        };
        if mean_fidelity.is_null() || std_error.is_null() {
            return PurisimStatusNullPointer;
        }
        if !step_curve.is_null() && step_len != handle.config.n_qubits {
            return PurisimStatusInvalidArgument;
        }
        match run_scenario(&handle.config) {
            Ok(summary) => {
                unsafe {
                    *mean_fidelity = summary.mean_fidelity;
                    *std_error = summary.std_error;
                    if !step_curve.is_null() {
                        ptr::copy_nonoverlapping(
                            summary.mean_step_fidelities.as_ptr(),
                            step_curve,
                            step_len,
                        );
                    }
                }
                PurisimStatusOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Number of reachable purified register sizes for an ensemble of
/// `n_qubits` (the sizes are `0, 2, ..., n_qubits`). Needed to size the
/// buffers of [`purisim_purification_stats`].
#[no_mangle]
pub extern "C" fn purisim_purification_count(
    n_qubits: usize,
    count: *mut usize,
) -> PurisimStatus {
    guarded(|| {
        if count.is_null() {
            return PurisimStatusNullPointer;
        }
        if n_qubits == 0 || n_qubits % 2 != 0 {
            return PurisimStatusInvalidArgument;
        }
        match ChannelSpec::new(0.75).and_then(|ch| purification_distribution(n_qubits, &ch)) {
            Ok(dist) => {
                unsafe { *count = dist.sizes().len() };
                PurisimStatusOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Writes the register-size probabilities and the matching single-qubit
/// fidelities of the purification step. `sizes`, `probabilities`, and
/// `fidelities` must each hold `len` entries with `len` equal to the count
/// reported by [`purisim_purification_count`].
#[no_mangle]
pub extern "C" fn purisim_purification_stats(
    n_qubits: usize,
    c1: f64,
    sizes: *mut usize,
    probabilities: *mut f64,
    fidelities: *mut f64,
    len: usize,
) -> PurisimStatus {
    guarded(|| {
        if sizes.is_null() || probabilities.is_null() || fidelities.is_null() {
            return PurisimStatusNullPointer;
        }
        if n_qubits == 0 || n_qubits % 2 != 0 {
            return PurisimStatusInvalidArgument;
        }
        let channel = match ChannelSpec::new(c1) {
            Ok(ch) => ch,
            Err(e) => return status_of(&e),
        };
        let dist = match purification_distribution(n_qubits, &channel) {
            Ok(d) => d,
            Err(e) => return status_of(&e),
        };
        if len != dist.sizes().len() {
            return PurisimStatusInvalidArgument;
        }
        for (i, (m, p)) in dist.iter().enumerate() {
            unsafe {
                *sizes.add(i) = m;
                *probabilities.add(i) = p;
                *fidelities.add(i) = single_qubit_fidelity(m, &channel);
            }
        }
        PurisimStatusOk
    })
}

/// Mean single-qubit fidelity after purification, averaged over register
/// sizes by their probabilities.
#[no_mangle]
pub extern "C" fn purisim_mean_purified_fidelity(
    n_qubits: usize,
    c1: f64,
    out: *mut f64,
) -> PurisimStatus {
    guarded(|| {
        if out.is_null() {
            return PurisimStatusNullPointer;
        }
        if n_qubits == 0 || n_qubits % 2 != 0 {
            return PurisimStatusInvalidArgument;
        }
        let result = ChannelSpec::new(c1)
            .and_then(|ch| purification_distribution(n_qubits, &ch))
            .map(|dist| mean_purified_fidelity(&dist));
        match result {
            Ok(value) => {
                unsafe { *out = value };
                PurisimStatusOk
            }
            Err(e) => status_of(&e),
        }
    })
}
