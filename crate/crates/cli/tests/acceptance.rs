// Acceptance suite. Each test prints one `criterion N (...): PASS` line;
// a failing criterion panics with a message that starts with the matching
// FAIL line. Run with `cargo test -p feedsolve-cli --test acceptance`.

use std::process::Command;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use feedsolve::dag::{
    build_dependency_graph, predict_jacobi_sweeps, simulate_schedule_time, CostModel, Schedule,
};
use feedsolve::zoo::{sample_input, sample_system, ChainKind, Family, ALL_FAMILIES};
use feedsolve::{
    exact_convergence_sweep, feedforward_evaluate, residual, solve_gs_jacobi, solve_jacobi,
    solve_jacobi_gs, BlockPartition, Initializer, SolveResult, SolverConfig, StateSequence,
};

/// Deterministic roster of seeded random systems across every family,
/// T in [1, 64], at least 100 entries.
fn suite_systems() -> Vec<(Family, usize, u64)> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
    for i in 0..105u64 {
        let family = ALL_FAMILIES[(i % 7) as usize];
        let t = rng.gen_range(1..=family.max_t());
        out.push((family, t, 1000 + i));
    }
    // pin the extremes: length 1 and the largest length per family
    for (i, &family) in ALL_FAMILIES.iter().enumerate() {
        out.push((family, 1, 7000 + i as u64));
        out.push((family, family.max_t(), 8000 + i as u64));
    }
    out.push((Family::Made, 64, 9001)); // full-length masked sampler
    out
}

fn initializers() -> [Initializer; 3] {
    [
        Initializer::Zeros,
        Initializer::Constant(1.0),
        Initializer::SeededRandom {
            seed: 77,
            scale: 2.0,
        },
    ]
}

fn random_partition(t: usize, seed: u64) -> BlockPartition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks = Vec::new();
    let mut a = 1;
    while a <= t {
        let b = (a + rng.gen_range(0..5)).min(t);
        blocks.push((a, b));
        a = b + 1;
    }
    BlockPartition::new(blocks, t).unwrap()
}

fn config_with(init: Initializer) -> SolverConfig {
    SolverConfig {
        initializer: init,
        ..SolverConfig::default()
    }
}

fn solve_suite_entry(
    family: Family,
    t: usize,
    seed: u64,
    init: Initializer,
) -> (feedsolve::RecurrenceSystem, Vec<f64>, StateSequence, SolveResult) {
    let system = sample_system(family, t, seed);
    let input = sample_input(&system, seed.wrapping_add(1));
    let truth = feedforward_evaluate(&system, &input).expect("finite system");
    let result = solve_jacobi(&system, &input, &config_with(init), Some(&truth))
        .expect("jacobi solve succeeds");
    (system, input, truth, result)
}

#[test]
fn criterion_01_jacobi_bitwise_within_t_sweeps() {
    let systems = suite_systems();
    assert!(systems.len() >= 100);
    let mut failures = Vec::new();
    for &(family, t, seed) in &systems {
        for init in initializers() {
            let (_, _, truth, result) = solve_suite_entry(family, t, seed, init);
            if !result.states.bitwise_eq(&truth) {
                failures.push(format!("{family:?} t={t} seed={seed} {init:?}: not bitwise"));
                continue;
            }
            if result.sweeps_used > t {
                failures.push(format!(
                    "{family:?} t={t} seed={seed} {init:?}: {} sweeps",
                    result.sweeps_used
                ));
            }
            for (i, snap) in result.trace.sweep_states.iter().enumerate() {
                if !snap.bitwise_eq_prefix(&truth, i + 1) {
                    failures.push(format!(
                        "{family:?} t={t} seed={seed} {init:?}: prefix broken at sweep {}",
                        i + 1
                    ));
                    break;
                }
            }
        }
    }
    assert!(
        failures.is_empty(),
        "criterion 1 (jacobi exactness): FAIL\n{}",
        failures.join("\n")
    );
    println!(
        "criterion 1 (jacobi bitwise convergence within T sweeps, {} systems x 3 initializers): PASS",
        systems.len()
    );
}

#[test]
fn criterion_02_hybrids_bitwise_within_block_caps() {
    let systems = suite_systems();
    let mut failures = Vec::new();
    for &(family, t, seed) in &systems {
        let system = sample_system(family, t, seed);
        let input = sample_input(&system, seed.wrapping_add(1));
        let truth = feedforward_evaluate(&system, &input).unwrap();
        for pseed in 0..3u64 {
            let partition = random_partition(t, seed.wrapping_mul(31).wrapping_add(pseed));
            let config = SolverConfig::default();

            let jgs = solve_jacobi_gs(&system, &input, &partition, &config, Some(&truth)).unwrap();
            if !jgs.states.bitwise_eq(&truth) || jgs.sweeps_used > partition.len() {
                failures.push(format!(
                    "jacobi-gs {family:?} t={t} seed={seed} p{pseed}: sweeps={}",
                    jgs.sweeps_used
                ));
            }
            // after outer sweep k the first k blocks are final
            for (i, snap) in jgs.trace.sweep_states.iter().enumerate() {
                let blocks_done = (i + 1).min(partition.len());
                let prefix_states = partition.blocks()[blocks_done - 1].1;
                if !snap.bitwise_eq_prefix(&truth, prefix_states) {
                    failures.push(format!(
                        "jacobi-gs {family:?} t={t} seed={seed} p{pseed}: block prefix at sweep {}",
                        i + 1
                    ));
                    break;
                }
            }

            let gsj = solve_gs_jacobi(&system, &input, &partition, &config, Some(&truth)).unwrap();
            let block_sweeps = gsj.block_sweeps.clone().unwrap();
            if !gsj.states.bitwise_eq(&truth) {
                failures.push(format!("gs-jacobi {family:?} t={t} seed={seed} p{pseed}: not bitwise"));
            }
            let mut row = 0usize;
            for (i, &k) in block_sweeps.iter().enumerate() {
                if k > partition.block_len(i) {
                    failures.push(format!(
                        "gs-jacobi {family:?} t={t} seed={seed} p{pseed}: block {i} took {k}"
                    ));
                }
                row += k;
                // once a block finishes, everything up to its end is final
                let prefix_states = partition.blocks()[i].1;
                if !gsj.trace.sweep_states[row - 1].bitwise_eq_prefix(&truth, prefix_states) {
                    failures.push(format!(
                        "gs-jacobi {family:?} t={t} seed={seed} p{pseed}: block {i} not final"
                    ));
                }
            }
        }
    }
    assert!(
        failures.is_empty(),
        "criterion 2 (hybrid exactness): FAIL\n{}",
        failures.join("\n")
    );
    println!(
        "criterion 2 (jacobi-gs within M sweeps, gs-jacobi within |B_i| per block, {} systems x 3 partitions): PASS",
        systems.len()
    );
}

#[test]
fn criterion_03_reduction_equivalences() {
    let mut cases = Vec::new();
    for (i, &family) in ALL_FAMILIES.iter().cycle().take(21).enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3000 + i as u64);
        let t = rng.gen_range(1..=family.max_t().min(24));
        cases.push((family, t, 500 + i as u64));
    }
    assert!(cases.len() >= 20);

    let mut failures = Vec::new();
    for &(family, t, seed) in &cases {
        let system = sample_system(family, t, seed);
        let input = sample_input(&system, seed.wrapping_add(1));
        let config = SolverConfig::default();
        let ffwd = feedforward_evaluate(&system, &input).unwrap();
        let jacobi = solve_jacobi(&system, &input, &config, None).unwrap();
        let singles = BlockPartition::singletons(t).unwrap();
        let whole = BlockPartition::single_block(t).unwrap();

        let sweep_equal = |a: &SolveResult, b: &SolveResult| {
            a.sweeps_used == b.sweeps_used
                && a.trace
                    .sweep_states
                    .iter()
                    .zip(&b.trace.sweep_states)
                    .all(|(x, y)| x.bitwise_eq(y))
                && a.trace
                    .records
                    .iter()
                    .zip(&b.trace.records)
                    .all(|(x, y)| x.forward_diff.to_bits() == y.forward_diff.to_bits())
        };

        let a = solve_jacobi_gs(&system, &input, &singles, &config, None).unwrap();
        if !sweep_equal(&a, &jacobi) {
            failures.push(format!("{family:?} t={t}: jacobi-gs(singletons) != jacobi"));
        }
        let b = solve_jacobi_gs(&system, &input, &whole, &config, None).unwrap();
        if !(b.sweeps_used == 1 && b.states.bitwise_eq(&ffwd)) {
            failures.push(format!("{family:?} t={t}: jacobi-gs(one block) != feedforward"));
        }
        let c = solve_gs_jacobi(&system, &input, &singles, &config, None).unwrap();
        if !(c.states.bitwise_eq(&ffwd) && c.block_sweeps == Some(vec![1; t])) {
            failures.push(format!("{family:?} t={t}: gs-jacobi(singletons) != feedforward"));
        }
        let d = solve_gs_jacobi(&system, &input, &whole, &config, None).unwrap();
        if !sweep_equal(&d, &jacobi) {
            failures.push(format!("{family:?} t={t}: gs-jacobi(one block) != jacobi"));
        }
    }
    assert!(
        failures.is_empty(),
        "criterion 3 (reductions): FAIL\n{}",
        failures.join("\n")
    );
    println!(
        "criterion 3 (hybrid reductions sweep-for-sweep over {} systems): PASS",
        cases.len()
    );
}

#[test]
fn criterion_04_structured_chain_sweep_counts() {
    let mut failures = Vec::new();
    for t in [1usize, 2, 5, 10, 100] {
        for kind in [ChainKind::Independent, ChainKind::Skip, ChainKind::Markov] {
            let family = match kind {
                ChainKind::Independent => Family::Independent,
                ChainKind::Skip => Family::Skip,
                ChainKind::Markov => Family::Markov,
            };
            let expected = match kind {
                ChainKind::Independent => 1,
                ChainKind::Skip => 2.min(t), // a length-1 chain has nothing to skip over
                ChainKind::Markov => t,
            };
            let system = sample_system(family, t, 42);
            let input = sample_input(&system, 43);
            let truth = feedforward_evaluate(&system, &input).unwrap();
            let r = solve_jacobi(&system, &input, &SolverConfig::default(), Some(&truth)).unwrap();
            let got = exact_convergence_sweep(&r.trace, &truth);
            if got != Some(expected) {
                failures.push(format!("{kind:?} t={t}: exact sweep {got:?}, expected {expected}"));
            }
        }
    }

    // the structural prediction bounds the measured sweep on every suite system
    for &(family, t, seed) in &suite_systems() {
        let depth = predict_jacobi_sweeps(&build_dependency_graph(&sample_system(family, t, seed)));
        for init in initializers() {
            let (_, _, truth, result) = solve_suite_entry(family, t, seed, init);
            let exact = exact_convergence_sweep(&result.trace, &truth);
            match exact {
                Some(k) if k <= depth => {}
                other => failures.push(format!(
                    "{family:?} t={t} seed={seed} {init:?}: exact {other:?} vs depth {depth}"
                )),
            }
        }
    }
    assert!(
        failures.is_empty(),
        "criterion 4 (chain sweep counts): FAIL\n{}",
        failures.join("\n")
    );
    println!("criterion 4 (independent/skip/markov sweep counts and depth bound): PASS");
}

#[test]
fn criterion_05_speedup_table_reference_values() {
    // (baseline iterations, method iterations) -> recorded speedup
    let table = [
        (784usize, 125usize, 6.3),
        (784, 173, 4.5),
        (1024, 862, 1.2),
        (784, 129, 6.0),
        (784, 140, 5.6),
        (1024, 654, 1.6),
    ];
    let mut failures = Vec::new();
    for &(baseline, iters, recorded) in &table {
        let computed = feedsolve::dag::theoretical_speedup(baseline, iters).unwrap();
        let diff = (computed - recorded).abs();
        if diff > 0.05 {
            failures.push(format!(
                "{baseline}/{iters} = {computed:.4}, recorded {recorded}, |diff| = {diff:.4} > 0.05"
            ));
        }
    }
    assert!(
        failures.is_empty(),
        "criterion 5 (speedup table arithmetic): FAIL\n{}",
        failures.join("\n")
    );
    println!("criterion 5 (speedup table arithmetic within 0.05): PASS");
}

#[test]
fn criterion_06_cost_simulator_identities() {
    let mut failures = Vec::new();

    // uniform costs: jacobi never loses to feedforward while K <= T
    for t in [1usize, 2, 7, 33, 100] {
        let costs = CostModel::uniform(t).unwrap();
        let ff = simulate_schedule_time(&Schedule::Feedforward, &costs).unwrap();
        for sweeps in 1..=t {
            let jac = simulate_schedule_time(&Schedule::Jacobi { sweeps }, &costs).unwrap();
            if jac > ff {
                failures.push(format!("uniform t={t} k={sweeps}: jacobi {jac} > feedforward {ff}"));
            }
        }
    }

    // power-of-two scaling is exact across every schedule shape
    let base = CostModel::new(
        vec![0.3, 1.7, 0.9, 2.2, 0.4],
        vec![0.1, 1.7, 0.4, 2.2, 0.3],
    )
    .unwrap();
    let partition = BlockPartition::new(vec![(1, 2), (3, 3), (4, 5)], 5).unwrap();
    let block_sweeps = [2usize, 1, 2];
    let schedules = [
        Schedule::Feedforward,
        Schedule::FeedforwardCached,
        Schedule::Jacobi { sweeps: 3 },
        Schedule::JacobiGs {
            sweeps: 2,
            partition: &partition,
        },
        Schedule::GsJacobi {
            block_sweeps: &block_sweeps,
            partition: &partition,
        },
    ];
    for c in [2.0, 0.5, 8.0] {
        let scaled = base.scaled(c).unwrap();
        for s in &schedules {
            let a = simulate_schedule_time(s, &base).unwrap();
            let b = simulate_schedule_time(s, &scaled).unwrap();
            if (a * c).to_bits() != b.to_bits() {
                failures.push(format!("{s:?}: scaling by {c} not exact ({} vs {})", a * c, b));
            }
        }
    }

    // jacobi-gs per-sweep charge: max over blocks of within-block serial
    // sums, against hand-computed values on three fixed models
    let hand_cases = [
        // (parallel, serial, blocks, expected per-sweep charge)
        (
            vec![1.0; 5],
            vec![2.0, 1.0, 3.0, 1.0, 2.0],
            vec![(1usize, 2usize), (3, 3), (4, 5)],
            3.0, // max(2+1, 3, 1+2)
        ),
        (
            vec![4.0, 4.0, 4.0, 4.0],
            vec![1.0, 1.0, 1.0, 1.0],
            vec![(1, 4)],
            4.0, // 1+1+1+1
        ),
        (
            vec![9.0, 9.0, 9.0, 9.0, 9.0, 9.0],
            vec![0.5, 2.5, 1.0, 1.0, 1.0, 4.0],
            vec![(1, 2), (3, 5), (6, 6)],
            4.0, // max(3.0, 3.0, 4.0)
        ),
    ];
    for (i, (parallel, serial, blocks, expected)) in hand_cases.into_iter().enumerate() {
        let t = parallel.len();
        let costs = CostModel::new(parallel, serial).unwrap();
        let p = BlockPartition::new(blocks, t).unwrap();
        let per_sweep = simulate_schedule_time(
            &Schedule::JacobiGs {
                sweeps: 1,
                partition: &p,
            },
            &costs,
        )
        .unwrap();
        if per_sweep != expected {
            failures.push(format!("hand case {i}: charge {per_sweep}, expected {expected}"));
        }
    }

    assert!(
        failures.is_empty(),
        "criterion 6 (cost identities): FAIL\n{}",
        failures.join("\n")
    );
    println!("criterion 6 (cost-simulator identities and hand-checked charges): PASS");
}

#[test]
fn criterion_07_zero_forward_difference_soundness() {
    let mut failures = Vec::new();
    let mut zero_rows = 0usize;
    for &(family, t, seed) in &suite_systems() {
        for init in initializers() {
            let (system, input, truth, result) = solve_suite_entry(family, t, seed, init);
            for (rec, snap) in result.trace.records.iter().zip(&result.trace.sweep_states) {
                if rec.forward_diff != 0.0 {
                    continue;
                }
                zero_rows += 1;
                if !snap.bitwise_eq(&truth) {
                    failures.push(format!(
                        "{family:?} t={t} seed={seed} {init:?}: fd=0 at sweep {} but not ground truth",
                        rec.sweep
                    ));
                }
                let res = residual(&system, &input, snap).unwrap();
                if res.iter().flatten().any(|&v| v != 0.0) {
                    failures.push(format!(
                        "{family:?} t={t} seed={seed} {init:?}: fd=0 at sweep {} with nonzero residual",
                        rec.sweep
                    ));
                }
            }
        }
    }
    assert!(zero_rows > 0, "criterion 7: no zero forward differences observed");
    assert!(
        failures.is_empty(),
        "criterion 7 (fixed-point soundness): FAIL\n{}",
        failures.join("\n")
    );
    println!("criterion 7 (zero forward difference implies exact fixed point, {zero_rows} rows): PASS");
}

#[test]
fn criterion_08_scheduling_independence_and_byte_reproducibility() {
    let mut failures = Vec::new();

    // worker count must not change a single bit of the trace
    for &(family, t, seed) in &[
        (Family::Linear, 24usize, 11u64),
        (Family::MlpDense, 16, 12),
        (Family::Made, 24, 13),
        (Family::Markov, 40, 14),
        (Family::Skip, 64, 15),
    ] {
        let system = sample_system(family, t, seed);
        let input = sample_input(&system, seed + 1);
        let solo = solve_jacobi(
            &system,
            &input,
            &SolverConfig {
                workers: Some(1),
                ..SolverConfig::default()
            },
            None,
        )
        .unwrap();
        let many = solve_jacobi(
            &system,
            &input,
            &SolverConfig {
                workers: Some(8),
                ..SolverConfig::default()
            },
            None,
        )
        .unwrap();
        let same = solo.sweeps_used == many.sweeps_used
            && solo
                .trace
                .records
                .iter()
                .zip(&many.trace.records)
                .all(|(a, b)| a.forward_diff.to_bits() == b.forward_diff.to_bits())
            && solo
                .trace
                .sweep_states
                .iter()
                .zip(&many.trace.sweep_states)
                .all(|(a, b)| a.bitwise_eq(b));
        if !same {
            failures.push(format!("{family:?} t={t}: 1 worker and 8 workers disagree"));
        }
    }

    // identical CLI spec + seed: byte-identical output files
    let dir = TempDir::new().unwrap();
    let spec_path = dir.path().join("spec.toml");
    std::fs::write(
        &spec_path,
        "version = 1\n[model]\nkind = \"made\"\nt = 32\nseed = 21\n[solver]\nmethod = \"gs-jacobi\"\nblock_size = 8\n",
    )
    .unwrap();
    let run = |trace: &str, summary: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_feedsolve"))
            .current_dir(dir.path())
            .args([
                "solve",
                "--spec",
                spec_path.to_str().unwrap(),
                "--trace",
                trace,
                "--summary",
                summary,
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{out:?}");
    };
    run("a.csv", "a.txt");
    run("b.csv", "b.txt");
    let bytes = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    if bytes("a.csv") != bytes("b.csv") || bytes("a.txt") != bytes("b.txt") {
        failures.push("CLI outputs differ across identical runs".into());
    }

    assert!(
        failures.is_empty(),
        "criterion 8 (determinism): FAIL\n{}",
        failures.join("\n")
    );
    println!("criterion 8 (worker-count independence and byte-identical CLI outputs): PASS");
}
