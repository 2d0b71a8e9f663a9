//! The three pipelines behind the CLI subcommands.

use feedsolve::dag::{
    build_dependency_graph, dependency_depth, fill_solve_costs, predict_gs_jacobi_block_sweeps,
    predict_jacobi_gs_sweeps, predict_jacobi_sweeps, simulate_schedule_time, CostBasis, CostModel,
    Schedule,
};
use feedsolve::zoo::sample_input;
use feedsolve::{
    exact_convergence_sweep, feedforward_evaluate, solve_gauss_seidel, solve_gs_jacobi,
    solve_jacobi, solve_jacobi_gs, BlockPartition, SolveResult, SolverConfig, StateSequence,
};

use crate::error::CliError;
use crate::output::{fmt_f64, key_value_block, trace_csv, write_file};
use crate::spec::{ExperimentSpec, MethodName};

struct SolveOutcome {
    result: SolveResult,
    /// Parallel iterations to convergence: the exact-convergence sweep
    /// when ground truth is available, otherwise the executed sweeps. The
    /// feedforward baselines count their `T` sequential steps.
    iterations: usize,
    exact_sweep: Option<usize>,
    /// Cumulative simulated cost through the convergence sweep.
    sim_time: f64,
}

fn cost_model(spec: &ExperimentSpec) -> Result<CostModel, CliError> {
    CostModel::new(spec.parallel_costs.clone(), spec.serial_costs.clone())
        .map_err(|e| CliError::Spec(e.to_string()))
}

fn solver_config(spec: &ExperimentSpec) -> SolverConfig {
    SolverConfig {
        epsilon: spec.epsilon,
        norm: spec.norm,
        max_sweeps_override: spec.max_sweeps,
        initializer: spec.initializer,
        workers: spec.workers,
    }
}

fn require_partition(spec: &ExperimentSpec, method: MethodName) -> Result<BlockPartition, CliError> {
    spec.partition.clone().ok_or_else(|| {
        CliError::Spec(format!(
            "method {} requires a partition; set solver.partition or solver.block_size",
            method.name()
        ))
    })
}

fn run_method(
    spec: &ExperimentSpec,
    method: MethodName,
    system: &feedsolve::RecurrenceSystem,
    input: &[f64],
    truth: Option<&StateSequence>,
    costs: &CostModel,
) -> Result<SolveOutcome, CliError> {
    let config = solver_config(spec);
    let (mut result, basis) = match method {
        MethodName::Feedforward => (
            solve_gauss_seidel(system, input, &config, truth)?,
            CostBasis::Feedforward,
        ),
        MethodName::FeedforwardCached => (
            solve_gauss_seidel(system, input, &config, truth)?,
            CostBasis::FeedforwardCached,
        ),
        MethodName::Jacobi => (
            solve_jacobi(system, input, &config, truth)?,
            CostBasis::Jacobi,
        ),
        MethodName::JacobiGs => {
            let p = require_partition(spec, method)?;
            (
                solve_jacobi_gs(system, input, &p, &config, truth)?,
                CostBasis::JacobiGs,
            )
        }
        MethodName::GsJacobi => {
            let p = require_partition(spec, method)?;
            (
                solve_gs_jacobi(system, input, &p, &config, truth)?,
                CostBasis::GsJacobi,
            )
        }
    };
    fill_solve_costs(&mut result, basis, costs, spec.partition.as_ref())?;

    let exact_sweep = truth.and_then(|t| exact_convergence_sweep(&result.trace, t));
    let (iterations, converged_rows) = match method {
        // one parallel iteration of feedforward is one sequential step
        MethodName::Feedforward | MethodName::FeedforwardCached => {
            (system.t_len(), result.trace.records.len())
        }
        _ => match exact_sweep {
            Some(k) => {
                let idx = result.trace.records.iter().position(|r| r.sweep == k).unwrap();
                (k, idx + 1)
            }
            None => (result.sweeps_used, result.trace.records.len()),
        },
    };
    let sim_time = result.trace.records[..converged_rows]
        .iter()
        .map(|r| r.sim_cost.unwrap_or(0.0))
        .sum();

    Ok(SolveOutcome {
        result,
        iterations,
        exact_sweep,
        sim_time,
    })
}

fn failure_summary(spec: &ExperimentSpec, step: usize) -> String {
    key_value_block(&[
        ("status", "numeric-failure".into()),
        ("failed_step", step.to_string()),
        ("method", spec.method.name().into()),
        ("kind", spec.model().kind.name().into()),
        ("t", spec.t_len().to_string()),
        ("seed", spec.model().seed.to_string()),
    ])
}

/// Runs the configured solver, writing the per-sweep trace CSV and a
/// key-value summary. On numeric failure the summary names the offending
/// step and the process exits with code 3.
pub fn run_solve(spec: &ExperimentSpec) -> Result<(), CliError> {
    let outcome = (|| -> Result<(SolveOutcome, CostModel), CliError> {
        let system = spec.build_system()?;
        let input = sample_input(&system, spec.input_seed);
        let costs = cost_model(spec)?;
        let truth = if spec.ground_truth {
            Some(feedforward_evaluate(&system, &input)?)
        } else {
            None
        };
        let outcome = run_method(spec, spec.method, &system, &input, truth.as_ref(), &costs)?;
        Ok((outcome, costs))
    })();

    let (outcome, costs) = match outcome {
        Ok(v) => v,
        Err(CliError::Numeric { step }) => {
            write_file(&spec.summary_path, &failure_summary(spec, step))?;
            return Err(CliError::Numeric { step });
        }
        Err(e) => return Err(e),
    };

    write_file(&spec.trace_path, &trace_csv(&outcome.result.trace))?;

    let t = spec.t_len();
    let ff_time = simulate_schedule_time(&Schedule::Feedforward, &costs)?;
    let cached_time = simulate_schedule_time(&Schedule::FeedforwardCached, &costs)?;
    let speedup = t as f64 / outcome.iterations as f64;
    let last = outcome.result.trace.records.last().expect("at least one sweep");

    let mut pairs: Vec<(&str, String)> = vec![
        ("status", "ok".into()),
        ("version", crate::spec::SPEC_VERSION.to_string()),
        ("method", spec.method.name().into()),
        ("kind", spec.model().kind.name().into()),
        ("t", t.to_string()),
        ("seed", spec.model().seed.to_string()),
        ("input_seed", spec.input_seed.to_string()),
        ("epsilon", fmt_f64(spec.epsilon)),
        ("norm", spec.norm.name().into()),
    ];
    if let Some(p) = &spec.partition {
        pairs.push(("partition", p.to_string()));
    }
    pairs.push(("sweeps_used", outcome.result.sweeps_used.to_string()));
    pairs.push(("stopping", outcome.result.trace.stopping.to_string()));
    if spec.ground_truth {
        let v = outcome
            .exact_sweep
            .map(|k| k.to_string())
            .unwrap_or_else(|| "none".into());
        pairs.push(("exact_convergence_sweep", v));
    }
    pairs.push(("final_forward_diff", fmt_f64(last.forward_diff)));
    pairs.push(("method_iterations", outcome.iterations.to_string()));
    pairs.push(("sim_time", fmt_f64(outcome.sim_time)));
    pairs.push(("sim_time_feedforward", fmt_f64(ff_time)));
    pairs.push(("sim_time_feedforward_cached", fmt_f64(cached_time)));
    pairs.push(("theoretical_speedup", fmt_f64(speedup)));
    pairs.push(("trace_rows", outcome.result.trace.records.len().to_string()));

    write_file(&spec.summary_path, &key_value_block(&pairs))?;
    Ok(())
}

/// Structure-only report: dependency depth, predicted sweep counts, and
/// predicted times and speedups for every method under the cost model.
/// Without an explicit partition the block methods are analyzed over
/// singleton blocks.
pub fn run_analyze(spec: &ExperimentSpec) -> Result<String, CliError> {
    let system = spec.build_system()?;
    let costs = cost_model(spec)?;
    let graph = build_dependency_graph(&system);
    let t = system.t_len();
    let depth = dependency_depth(&graph);

    let (partition, partition_label) = match &spec.partition {
        Some(p) => (p.clone(), p.to_string()),
        None => (
            BlockPartition::singletons(t).map_err(|e| CliError::Spec(e.to_string()))?,
            "singletons (default)".to_string(),
        ),
    };

    let jacobi_pred = predict_jacobi_sweeps(&graph);
    let jgs_pred = predict_jacobi_gs_sweeps(&graph, &partition)?;
    let gsj_pred_blocks = predict_gs_jacobi_block_sweeps(&graph, &partition)?;
    let gsj_pred_total: usize = gsj_pred_blocks.iter().sum();

    let rows: Vec<(MethodName, usize, f64)> = vec![
        (
            MethodName::Feedforward,
            t,
            simulate_schedule_time(&Schedule::Feedforward, &costs)?,
        ),
        (
            MethodName::FeedforwardCached,
            t,
            simulate_schedule_time(&Schedule::FeedforwardCached, &costs)?,
        ),
        (
            MethodName::Jacobi,
            jacobi_pred,
            simulate_schedule_time(&Schedule::Jacobi { sweeps: jacobi_pred }, &costs)?,
        ),
        (
            MethodName::JacobiGs,
            jgs_pred,
            simulate_schedule_time(
                &Schedule::JacobiGs {
                    sweeps: jgs_pred,
                    partition: &partition,
                },
                &costs,
            )?,
        ),
        (
            MethodName::GsJacobi,
            gsj_pred_total,
            simulate_schedule_time(
                &Schedule::GsJacobi {
                    block_sweeps: &gsj_pred_blocks,
                    partition: &partition,
                },
                &costs,
            )?,
        ),
    ];

    let mut out = key_value_block(&[
        ("kind", spec.model().kind.name().into()),
        ("t", t.to_string()),
        ("input_dim", system.input_dim().to_string()),
        ("dependency_depth", depth.to_string()),
        ("predicted_jacobi_sweeps", jacobi_pred.to_string()),
        ("partition", partition_label),
    ]);
    for (method, iterations, time) in rows {
        let speedup = t as f64 / iterations as f64;
        out.push_str(&format!(
            "method = {}: iterations = {}, sim_time = {}, speedup = {}\n",
            method.name(),
            iterations,
            fmt_f64(time),
            fmt_f64(speedup)
        ));
    }
    Ok(out)
}

/// Repeated seeded solves per method; writes one CSV row per method with
/// the mean and standard deviation of the iteration counts, the mean
/// simulated time, and the speedup against feedforward.
pub fn run_bench(spec: &ExperimentSpec) -> Result<String, CliError> {
    if spec.bench_methods.is_empty() {
        return Err(CliError::Spec(
            "bench needs a [bench] section with a methods list (or --method)".into(),
        ));
    }
    let system = spec.build_system()?;
    let costs = cost_model(spec)?;
    let t = spec.t_len();

    let mut table = String::from("method,sweeps_mean,sweeps_std,sim_time,theoretical_speedup\n");
    for &method in &spec.bench_methods {
        let mut sweeps = Vec::with_capacity(spec.bench_repeats);
        let mut times = Vec::with_capacity(spec.bench_repeats);
        for r in 0..spec.bench_repeats {
            let input_seed = spec.input_seed.wrapping_add(r as u64);
            let input = sample_input(&system, input_seed);
            let truth = if spec.ground_truth {
                Some(feedforward_evaluate(&system, &input)?)
            } else {
                None
            };
            let outcome = run_method(spec, method, &system, &input, truth.as_ref(), &costs)?;
            sweeps.push(outcome.iterations as f64);
            times.push(outcome.sim_time);
        }
        let n = sweeps.len() as f64;
        let mean = sweeps.iter().sum::<f64>() / n;
        let var = sweeps.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
        let time_mean = times.iter().sum::<f64>() / n;
        table.push_str(&format!(
            "{},{},{},{},{}\n",
            method.name(),
            fmt_f64(mean),
            fmt_f64(var.sqrt()),
            fmt_f64(time_mean),
            fmt_f64(t as f64 / mean)
        ));
    }

    write_file(&spec.table_path, &table)?;
    Ok(table)
}
