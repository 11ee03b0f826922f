//! Acceptance gate. Eight criteria covering the protocol math, collapse
//! statistics, estimator identities, the three headline experiments,
//! endpoint neutrality, and byte determinism. Each test prints one
//! PASS/FAIL line (visible with `--show-output` or on failure).

use std::process::Command;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use purisim::bayes::{select_direction_adaptive, Posterior, SphereGrid};
use purisim::harness::{
    run_scenario, ScenarioConfig, ScenarioSummary, Strategy, Weighting,
};
use purisim::measure::{exhaustive_outcome_tree, EntangledEnsemble};
use purisim::output::c1_grid;
use purisim::purify::{
    mean_purified_fidelity, purification_distribution, purified_state, purified_state_oracle,
    single_qubit_fidelity, ChannelSpec,
};
use purisim::qubit::PureQubit;

fn verdict(name: &str, failures: Vec<String>, detail: String) {
    if failures.is_empty() {
        println!("acceptance {name}: PASS {detail}");
    } else {
        println!("acceptance {name}: FAIL {detail}");
        for f in &failures {
            println!("  - {f}");
        }
        panic!("{name}: {} violation(s)", failures.len());
    }
}

fn channel_grid() -> Vec<f64> {
    c1_grid(0.5, 1.0, 11).unwrap()
}

/// Criterion 1: deterministic protocol math across the full size and
/// channel range.
#[test]
fn c1_protocol_math() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut max_oracle_gap = 0.0f64;
    let mut max_trace_gap = 0.0f64;
    let axis = PureQubit::new(1.0, 2.4).unwrap();

    for &c1 in &channel_grid() {
        let channel = ChannelSpec::new(c1).unwrap();
        for n in [2usize, 4, 6, 8, 10, 12] {
            let dist = purification_distribution(n, &channel).unwrap();
            let sum: f64 = dist.probs().iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                failures.push(format!("n={n} c1={c1}: size probabilities sum to {sum}"));
            }
            let mean = mean_purified_fidelity(&dist);
            if mean < c1 - 1e-12 {
                failures.push(format!("n={n} c1={c1}: mean fidelity {mean} below {c1}"));
            }
        }
        let f0 = single_qubit_fidelity(0, &channel);
        if (f0 - 0.5).abs() > 1e-15 {
            failures.push(format!("c1={c1}: empty-register fidelity {f0} is not 1/2"));
        }
        for m in 1..=12usize {
            let f = single_qubit_fidelity(m, &channel);
            if f < c1 - 1e-12 {
                failures.push(format!("m={m} c1={c1}: fidelity {f} below channel weight {c1}"));
            }
        }

        // Closed form vs quadrature, entrywise.
        for m in 1..=6usize {
            let closed = purified_state(m, &axis, &channel).unwrap().density();
            let oracle = purified_state_oracle(m, &axis, &channel, m + 4, 2 * m + 4).unwrap();
            let gap = (closed.matrix() - oracle.matrix())
                .iter()
                .map(|z| z.norm())
                .fold(0.0f64, f64::max);
            max_oracle_gap = max_oracle_gap.max(gap);
            if gap > 1e-8 {
                failures.push(format!("m={m} c1={c1}: quadrature gap {gap:.3e}"));
            }
        }

        // Series fidelity vs the dense single-qubit marginal. Large sizes
        // are spot-checked at three channel weights to keep this fast.
        let heavy = (c1 - 0.5).abs() < 1e-12 || (c1 - 0.75).abs() < 1e-12 || (c1 - 1.0).abs() < 1e-12;
        let dense_sizes: &[usize] = if heavy { &[1, 2, 3, 4, 5, 6, 7, 8, 10, 12] } else { &[1, 2, 3, 4, 5, 6, 7, 8] };
        for &m in dense_sizes {
            let rho = purified_state(m, &axis, &channel).unwrap().density();
            let marginal = rho.partial_trace_to_first().unwrap();
            let amps = axis.amplitudes();
            let mut f = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    f += (amps[i].conj() * marginal.matrix()[(i, j)] * amps[j]).re;
                }
            }
            let series = single_qubit_fidelity(m, &channel);
            let gap = (f - series).abs();
            max_trace_gap = max_trace_gap.max(gap);
            if gap > 1e-10 {
                failures.push(format!("m={m} c1={c1}: series vs dense marginal gap {gap:.3e}"));
            }
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 30.0 {
        failures.push(format!("runtime {elapsed:.1}s exceeds 30s"));
    }
    verdict(
        "C1 protocol math",
        failures,
        format!("(oracle gap {max_oracle_gap:.1e}, marginal gap {max_trace_gap:.1e}, {elapsed:.1}s)"),
    );
}

/// Criterion 2: sequential collapse statistics against the exact outcome
/// tree, with physicality checks on every conditioned state.
#[test]
fn c2_collapse_statistics() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let samples = 100_000usize;
    let mut worst_pull = 0.0f64;

    for (m, c1, seed) in [(1usize, 0.8f64, 61u64), (2, 0.8, 62), (3, 0.7, 63)] {
        let axis = PureQubit::new(0.9, 0.7).unwrap();
        let channel = ChannelSpec::new(c1).unwrap();
        let state = purified_state(m, &axis, &channel).unwrap();
        let mut dir_rng = ChaCha8Rng::seed_from_u64(seed);
        let dirs: Vec<PureQubit> =
            (0..m).map(|_| PureQubit::sample_uniform(&mut dir_rng)).collect();

        let tree = exhaustive_outcome_tree(&state.density(), &dirs).unwrap();
        let total: f64 = tree.iter().map(|p| p.probability).sum();
        if (total - 1.0).abs() > 1e-12 {
            failures.push(format!("m={m}: outcome tree total probability {total}"));
        }

        let mut counts = vec![0usize; tree.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xace);
        for sample in 0..samples {
            let mut ensemble = EntangledEnsemble::from_purified(&state);
            let mut index = 0usize;
            for (step, dir) in dirs.iter().enumerate() {
                // Complementary outcomes along a direction and its antipode
                // exhaust the Born rule exactly.
                if sample == 0 {
                    let v = dir.bloch_vector();
                    let antipode = PureQubit::from_bloch([-v[0], -v[1], -v[2]]).unwrap();
                    let p = ensemble.outcome_probability(dir).unwrap();
                    let q = ensemble.outcome_probability(&antipode).unwrap();
                    if (p + q - 1.0).abs() > 1e-12 {
                        failures.push(format!("m={m} step {step}: complementary sum {}", p + q));
                    }
                }
                let outcome = ensemble.measure(dir, &mut rng).unwrap();
                index = (index << 1) | usize::from(outcome);
                if step + 1 < m {
                    let conditioned = ensemble.state();
                    if (conditioned.trace() - 1.0).abs() > 1e-10
                        || conditioned.hermiticity_error() > 1e-10
                        || conditioned.min_eigenvalue() < -1e-10
                    {
                        failures.push(format!("m={m} step {step}: unphysical conditioned state"));
                    }
                }
            }
            counts[index] += 1;
        }

        for (i, path) in tree.iter().enumerate() {
            let freq = counts[i] as f64 / samples as f64;
            let se = (path.probability * (1.0 - path.probability) / samples as f64).sqrt();
            if se == 0.0 {
                if freq != path.probability {
                    failures.push(format!("m={m} path {i}: degenerate path frequency {freq}"));
                }
                continue;
            }
            let pull = (freq - path.probability).abs() / se;
            worst_pull = worst_pull.max(pull);
            if pull > 4.0 {
                failures.push(format!(
                    "m={m} path {i}: frequency {freq:.5} vs probability {:.5} ({pull:.1} SE)",
                    path.probability
                ));
            }
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 120.0 {
        failures.push(format!("runtime {elapsed:.1}s exceeds 120s"));
    }
    verdict(
        "C2 collapse statistics",
        failures,
        format!("(worst pull {worst_pull:.2} SE, {elapsed:.1}s)"),
    );
}

/// Criterion 3: estimator identities on randomly grown posteriors.
#[test]
fn c3_estimator_identities() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let grid = Arc::new(SphereGrid::fibonacci(1024).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut max_identity_gap = 0.0f64;

    for case in 0..100 {
        let mut posterior = Posterior::uniform(grid.clone());
        let truth = PureQubit::sample_uniform(&mut rng);
        let updates = 1 + (case % 30);
        let mut history = Vec::new();
        for _ in 0..updates {
            let dir = PureQubit::sample_uniform(&mut rng);
            let p1 = purisim::bayes::likelihood(dir.bloch_vector(), true, truth.bloch_vector());
            let outcome = rng.gen::<f64>() < p1;
            posterior.update(&dir, outcome).unwrap();
            history.push((dir, outcome));
        }

        // Predicted outcome probability equals the explicit weighted sum of
        // per-candidate likelihoods (the implementation only evaluates the
        // collapsed mean-vector form, so this is an independent route).
        let mean = posterior.posterior_mean_bloch();
        for _ in 0..5 {
            let probe = PureQubit::sample_uniform(&mut rng);
            let pv = probe.bloch_vector();
            let predicted = posterior.predicted_outcome_probability(&probe);
            let direct: f64 = posterior
                .weights()
                .iter()
                .zip(grid.points())
                .map(|(w, r)| w * purisim::bayes::likelihood(pv, true, *r))
                .sum();
            let gap = (predicted - direct).abs();
            max_identity_gap = max_identity_gap.max(gap);
            if gap > 1e-12 {
                failures.push(format!("case {case}: identity gap {gap:.2e}"));
            }
            let info = posterior.expected_information_gain(&probe);
            if !(0.0..=std::f64::consts::LN_2 + 1e-15).contains(&info) {
                failures.push(format!("case {case}: information gain {info} out of bounds"));
            }
        }

        // Adaptive selection is the exact grid argmin of |probe . mean|,
        // lowest index on ties. Compare indices, not recomputed vectors:
        // rebuilding the Bloch vector from angles costs an ulp.
        let chosen = select_direction_adaptive(&posterior);
        let argmin = (0..grid.len())
            .min_by(|&a, &b| {
                let da = {
                    let p = grid.point(a);
                    (p[0] * mean[0] + p[1] * mean[1] + p[2] * mean[2]).abs()
                };
                let db = {
                    let p = grid.point(b);
                    (p[0] * mean[0] + p[1] * mean[1] + p[2] * mean[2]).abs()
                };
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        let expected = grid.qubit(argmin);
        if chosen.theta() != expected.theta() || chosen.phi() != expected.phi() {
            failures.push(format!("case {case}: selection differs from grid argmin {argmin}"));
        }

        // Update order cannot matter.
        let mut reversed = Posterior::uniform(grid.clone());
        for (dir, outcome) in history.iter().rev() {
            reversed.update(dir, *outcome).unwrap();
        }
        let worst = posterior
            .weights()
            .iter()
            .zip(reversed.weights())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if worst > 1e-12 {
            failures.push(format!("case {case}: order dependence {worst:.2e}"));
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 60.0 {
        failures.push(format!("runtime {elapsed:.1}s exceeds 60s"));
    }
    verdict(
        "C3 estimator identities",
        failures,
        format!("(worst identity gap {max_identity_gap:.1e}, {elapsed:.1}s)"),
    );
}

/// Shared experiment table: eleven channel weights, three scenario variants,
/// sixty thousand trials each, one seed so compared variants share truths.
struct Table {
    c1_values: Vec<f64>,
    purified: Vec<ScenarioSummary>,
    unpurified: Vec<ScenarioSummary>,
    random_purified: Vec<ScenarioSummary>,
    build_seconds: f64,
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| {
        let start = Instant::now();
        let c1_values = channel_grid();
        let base = ScenarioConfig {
            n_qubits: 6,
            trials: 60_000,
            grid_size: 1024,
            master_seed: 2026,
            weighting: Weighting::Exact,
            strategy: Strategy::Adaptive,
            purify: true,
            ..ScenarioConfig::default()
        };
        let mut purified = Vec::new();
        let mut unpurified = Vec::new();
        let mut random_purified = Vec::new();
        for &c1 in &c1_values {
            purified.push(run_scenario(&ScenarioConfig { c1, ..base }).unwrap());
            unpurified
                .push(run_scenario(&ScenarioConfig { c1, purify: false, ..base }).unwrap());
            random_purified.push(
                run_scenario(&ScenarioConfig { c1, strategy: Strategy::Random, ..base })
                    .unwrap(),
            );
        }
        Table {
            c1_values,
            purified,
            unpurified,
            random_purified,
            build_seconds: start.elapsed().as_secs_f64(),
        }
    })
}

fn combined_se(a: &ScenarioSummary, b: &ScenarioSummary) -> f64 {
    (a.std_error.powi(2) + b.std_error.powi(2)).sqrt()
}

/// Criterion 4: purification lifts the mean estimation fidelity at every
/// interior channel weight, with the documented relative gain.
#[test]
fn c4_purification_gain() {
    let t = table();
    let mut failures = Vec::new();
    let mut gains = Vec::new();
    let mut min_margin = f64::INFINITY;
    for i in 1..=9usize {
        let c1 = t.c1_values[i];
        let p = &t.purified[i];
        let u = &t.unpurified[i];
        let diff = p.mean_fidelity - u.mean_fidelity;
        let se = combined_se(p, u);
        min_margin = min_margin.min(diff / se);
        if diff <= 2.0 * se {
            failures.push(format!(
                "c1={c1}: purified {:.5} vs unpurified {:.5} is only {:.1} SE",
                p.mean_fidelity,
                u.mean_fidelity,
                diff / se
            ));
        }
        gains.push(diff / u.mean_fidelity);
    }
    let avg = gains.iter().sum::<f64>() / gains.len() as f64;
    let max = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(0.02..=0.05).contains(&avg) {
        failures.push(format!("average relative gain {:.2}% outside [2%, 5%]", avg * 100.0));
    }
    // Known to fail at the pinned estimator resolution: the peak relative
    // gain measures about 3.5%. Coarser posterior grids inflate the ratio
    // (they degrade the weakly polarized unpurified baseline faster than the
    // purified register), which is how the documented 4% to 7% window was
    // originally reached. The assertion is kept as stated rather than tuned.
    if !(0.04..=0.07).contains(&max) {
        failures.push(format!("maximum relative gain {:.2}% outside [4%, 7%]", max * 100.0));
    }
    verdict(
        "C4 purification gain",
        failures,
        format!(
            "(avg gain {:.2}%, max gain {:.2}%, min margin {min_margin:.1} SE, table {:.0}s)",
            avg * 100.0,
            max * 100.0,
            t.build_seconds
        ),
    );
}

/// Criterion 5: the entropy-gain strategy beats random probing on purified
/// registers, strictly away from the pure-state end.
#[test]
fn c5_adaptive_beats_random() {
    let t = table();
    let mut failures = Vec::new();
    let mut min_margin = f64::INFINITY;
    for i in 1..=9usize {
        let c1 = t.c1_values[i];
        let a = &t.purified[i];
        let r = &t.random_purified[i];
        let diff = a.mean_fidelity - r.mean_fidelity;
        let se = combined_se(a, r);
        min_margin = min_margin.min(diff / se);
        if diff < 0.0 {
            failures.push(format!(
                "c1={c1}: adaptive {:.5} below random {:.5}",
                a.mean_fidelity, r.mean_fidelity
            ));
        }
        if c1 <= 0.9 + 1e-12 && diff <= 2.0 * se {
            failures.push(format!(
                "c1={c1}: adaptive advantage only {:.1} SE",
                diff / se
            ));
        }
    }
    verdict(
        "C5 adaptive beats random",
        failures,
        format!("(min margin {min_margin:.1} SE)"),
    );
}

/// Criterion 6: per-step curves at the reference channel weight show the
/// early purified advantage and the late purified stagnation.
#[test]
fn c6_step_curve_shape() {
    let t = table();
    let mut failures = Vec::new();
    let i = t
        .c1_values
        .iter()
        .position(|&c| (c - 0.75).abs() < 1e-12)
        .expect("0.75 in the channel grid");
    let p = &t.purified[i];
    let u = &t.unpurified[i];
    let mut min_margin = f64::INFINITY;
    for n in 0..3usize {
        let diff = p.mean_step_fidelities[n] - u.mean_step_fidelities[n];
        let se =
            (p.step_std_errors[n].powi(2) + u.step_std_errors[n].powi(2)).sqrt();
        min_margin = min_margin.min(diff / se);
        if diff <= 2.0 * se {
            failures.push(format!(
                "step {}: purified lead is only {:.1} SE",
                n + 1,
                diff / se
            ));
        }
    }
    let p_inc = p.mean_step_fidelities[5] - p.mean_step_fidelities[3];
    let u_inc = u.mean_step_fidelities[5] - u.mean_step_fidelities[3];
    if p_inc >= u_inc {
        failures.push(format!(
            "late increments: purified {p_inc:.5} not below unpurified {u_inc:.5}"
        ));
    }
    verdict(
        "C6 step curve shape",
        failures,
        format!("(early margin {min_margin:.1} SE, late increments {p_inc:.4} vs {u_inc:.4})"),
    );
}

/// Criterion 7: at the channel extremes both pipelines carry identical
/// information, so their means agree.
#[test]
fn c7_endpoint_neutrality() {
    let t = table();
    let mut failures = Vec::new();
    let mut max_pull = 0.0f64;
    for i in [0usize, 10] {
        let c1 = t.c1_values[i];
        let p = &t.purified[i];
        let u = &t.unpurified[i];
        let diff = (p.mean_fidelity - u.mean_fidelity).abs();
        let se = combined_se(p, u);
        max_pull = max_pull.max(diff / se);
        if diff > 3.0 * se {
            failures.push(format!(
                "c1={c1}: pipelines differ by {:.1} SE ({:.5} vs {:.5})",
                diff / se,
                p.mean_fidelity,
                u.mean_fidelity
            ));
        }
    }
    verdict("C7 endpoint neutrality", failures, format!("(max pull {max_pull:.1} SE)"));
}

/// Criterion 8: identical seeds give identical bytes, and the worker count
/// changes nothing but wall time.
#[test]
fn c8_byte_determinism() {
    let mut failures = Vec::new();
    let epoch = ("SOURCE_DATE_EPOCH", "1700000000");
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("stats", vec!["stats", "--n", "6", "--c1", "0.75"]),
        (
            "run",
            vec![
                "run", "--n", "4", "--trials", "150", "--grid-size", "256", "--seed", "9",
                "--purify",
            ],
        ),
        (
            "sweep",
            vec![
                "sweep", "--n", "4", "--trials", "60", "--grid-size", "256", "--seed", "9",
                "--c1-min", "0.6", "--c1-max", "0.7", "--c1-steps", "2",
            ],
        ),
        ("trace", vec!["trace", "--n", "4", "--trials", "60", "--grid-size", "256"]),
    ];
    for (name, args) in &cases {
        let mut outputs = Vec::new();
        for workers in ["1", "1", "2"] {
            let mut cmd = Command::new(env!("CARGO_BIN_EXE_purisim"));
            cmd.args(args).env(epoch.0, epoch.1);
            if *name != "stats" {
                cmd.args(["--workers", workers]);
            }
            let out = cmd.output().expect("spawn binary");
            if !out.status.success() {
                failures.push(format!("{name}: exit {:?}", out.status.code()));
            }
            outputs.push(out.stdout);
        }
        if outputs[0] != outputs[1] {
            failures.push(format!("{name}: repeated run differs"));
        }
        if outputs[0] != outputs[2] {
            failures.push(format!("{name}: worker count changed the payload"));
        }
    }
    verdict("C8 byte determinism", failures, "(stats/run/sweep/trace x workers 1,1,2)".into());
}
