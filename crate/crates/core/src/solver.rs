//! Fixed-point sweeps over triangular systems: Jacobi, Gauss-Seidel, and
//! the two block hybrids, with per-sweep tracing and early stopping.
//!
//! All four solvers share the update `s_t <- h_t(u, ...)`; they differ in
//! which snapshot the predecessor states are read from:
//!
//! - Gauss-Seidel reads already-updated values, so one sweep in index
//!   order reproduces feedforward computation exactly.
//! - Jacobi reads the previous sweep's snapshot for every `t`; all `T`
//!   updates are data-independent and run in parallel. On a triangular
//!   system the sweep-`k` iterate fixes the first `k` states bit for bit,
//!   so at most `T` sweeps are needed for any initialization.
//! - Jacobi-GS updates all blocks in parallel from the previous snapshot,
//!   sequentially inside each block; at most `M` outer sweeps.
//! - GS-Jacobi finalizes blocks in order, iterating Jacobi inside block
//!   `B_i` at most `|B_i|` times against the already-final earlier blocks.
//!
//! With `epsilon = 0` convergence is declared only on bitwise-equal
//! consecutive iterates, and every solver returns states bitwise equal to
//! [`feedforward_evaluate`](crate::system::feedforward_evaluate). The
//! sweep caps are hard guarantees, so reaching one with `epsilon = 0` is
//! still reported as `tolerance-met`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::partition::BlockPartition;
use crate::system::{
    diff_norm, forward_difference, states_bitwise_eq, NormKind, RecurrenceSystem, StateSequence,
};

/// Tag identifying which sweep scheme produced a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    GaussSeidel,
    Jacobi,
    JacobiGs,
    GsJacobi,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::GaussSeidel => "gauss-seidel",
            Method::Jacobi => "jacobi",
            Method::JacobiGs => "jacobi-gs",
            Method::GsJacobi => "gs-jacobi",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoppingReason {
    ToleranceMet,
    CapReached,
}

impl std::fmt::Display for StoppingReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StoppingReason::ToleranceMet => "tolerance-met",
            StoppingReason::CapReached => "cap-reached",
        })
    }
}

/// Initial guess `s^0`. Convergence within the caps holds for any choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Initializer {
    Zeros,
    Constant(f64),
    SeededRandom { seed: u64, scale: f64 },
}

impl Initializer {
    pub fn build(&self, system: &RecurrenceSystem) -> StateSequence {
        let states = match *self {
            Initializer::Zeros => system
                .state_dims()
                .iter()
                .map(|&d| vec![0.0; d])
                .collect(),
            Initializer::Constant(c) => system.state_dims().iter().map(|&d| vec![c; d]).collect(),
            Initializer::SeededRandom { seed, scale } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                system
                    .state_dims()
                    .iter()
                    .map(|&d| (0..d).map(|_| rng.gen_range(-scale..=scale)).collect())
                    .collect()
            }
        };
        StateSequence::new(states, 0)
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Stopping tolerance for the forward difference. Zero means stop only
    /// on bitwise-equal consecutive iterates.
    pub epsilon: f64,
    pub norm: NormKind,
    /// Caps sweeps below the structural limit; only meaningful with
    /// `epsilon > 0` since the structural caps already guarantee exactness.
    pub max_sweeps_override: Option<usize>,
    pub initializer: Initializer,
    /// Size of the worker pool for parallel updates. `None` uses the
    /// global pool. Results are bitwise-independent of this setting.
    pub workers: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            norm: NormKind::LInf,
            max_sweeps_override: None,
            initializer: Initializer::Zeros,
            workers: None,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(Error::Config {
                reason: format!("epsilon must be finite and non-negative, got {}", self.epsilon),
            });
        }
        if self.max_sweeps_override == Some(0) {
            return Err(Error::Config {
                reason: "max sweeps override must be at least 1".into(),
            });
        }
        if self.workers == Some(0) {
            return Err(Error::Config {
                reason: "worker count must be at least 1".into(),
            });
        }
        Ok(())
    }

    /// Effective sweep cap given the structural cap of the method.
    fn effective_cap(&self, structural: usize) -> Result<usize> {
        match self.max_sweeps_override {
            None => Ok(structural),
            Some(m) if m >= structural => Ok(structural),
            Some(m) if self.epsilon > 0.0 => Ok(m),
            Some(m) => Err(Error::Config {
                reason: format!(
                    "max sweeps override {m} is below the structural cap {structural}; \
                     that is only allowed with epsilon > 0"
                ),
            }),
        }
    }
}

/// One sweep of a trace: a parallel iteration in the sense of the cost
/// model.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    /// 1-based sweep index, strictly increasing across the trace.
    pub sweep: usize,
    /// Value of the stopping statistic at this sweep. For GS-Jacobi this
    /// is the active block's forward difference, as in its stopping rule.
    pub forward_diff: f64,
    /// Distance to the supplied ground truth, when one was supplied.
    pub error_to_truth: Option<f64>,
    /// Simulated cost of this sweep; filled by the cost model, not by the
    /// solver.
    pub sim_cost: Option<f64>,
}

/// Per-sweep history of a solve.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub method: Method,
    pub records: Vec<SweepRecord>,
    /// Snapshot of the full assignment after each sweep, aligned with
    /// `records`.
    pub sweep_states: Vec<StateSequence>,
    pub stopping: StoppingReason,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub states: StateSequence,
    pub trace: IterationTrace,
    /// Equals the trace length. For GS-Jacobi it counts inner sweeps
    /// summed over blocks.
    pub sweeps_used: usize,
    /// Inner sweep count per block; present only for GS-Jacobi.
    pub block_sweeps: Option<Vec<usize>>,
}

/// Smallest sweep index whose snapshot matches `truth` bit for bit, or
/// `None` when the trace never reaches it. Always at or below the sweep
/// where forward-difference stopping triggers, since detecting a fixed
/// point takes one extra equal sweep.
pub fn exact_convergence_sweep(trace: &IterationTrace, truth: &StateSequence) -> Option<usize> {
    trace
        .sweep_states
        .iter()
        .position(|s| s.bitwise_eq(truth))
        .map(|i| trace.records[i].sweep)
}

fn run_with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config {
                    reason: format!("could not build worker pool: {e}"),
                })?;
            Ok(pool.install(f))
        }
    }
}

/// Collects per-step results, surfacing the lowest-index error so failure
/// reports do not depend on worker scheduling.
fn first_error(results: Vec<Result<Vec<f64>>>) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        out.push(r?);
    }
    Ok(out)
}

struct TraceBuilder<'a> {
    method: Method,
    norm: NormKind,
    truth: Option<&'a StateSequence>,
    records: Vec<SweepRecord>,
    sweep_states: Vec<StateSequence>,
}

impl<'a> TraceBuilder<'a> {
    fn new(method: Method, norm: NormKind, truth: Option<&'a StateSequence>) -> Self {
        Self {
            method,
            norm,
            truth,
            records: Vec::new(),
            sweep_states: Vec::new(),
        }
    }

    fn push(&mut self, sweep: usize, forward_diff: f64, snapshot: StateSequence) {
        let error_to_truth = self
            .truth
            .map(|t| diff_norm(&snapshot.states, &t.states, self.norm));
        self.records.push(SweepRecord {
            sweep,
            forward_diff,
            error_to_truth,
            sim_cost: None,
        });
        self.sweep_states.push(snapshot);
    }

    fn finish(self, stopping: StoppingReason) -> IterationTrace {
        IterationTrace {
            method: self.method,
            records: self.records,
            sweep_states: self.sweep_states,
            stopping,
        }
    }
}

fn check_truth_shape(system: &RecurrenceSystem, truth: Option<&StateSequence>) -> Result<()> {
    if let Some(t) = truth {
        if t.states.len() != system.t_len() {
            return Err(Error::StateCount {
                expected: system.t_len(),
                got: t.states.len(),
            });
        }
    }
    Ok(())
}

/// One Gauss-Seidel sweep in index order. On a triangular system this is
/// feedforward computation, so the result is bitwise equal to
/// [`feedforward_evaluate`](crate::system::feedforward_evaluate) and
/// `sweeps_used` is always 1.
pub fn solve_gauss_seidel(
    system: &RecurrenceSystem,
    input: &[f64],
    config: &SolverConfig,
    ground_truth: Option<&StateSequence>,
) -> Result<SolveResult> {
    system.check_input(input)?;
    config.validate()?;
    check_truth_shape(system, ground_truth)?;

    let init = config.initializer.build(system);
    let mut states: Vec<Vec<f64>> = Vec::with_capacity(system.t_len());
    for t in 1..=system.t_len() {
        let next = system.eval_step(t, input, &states)?;
        states.push(next);
    }
    let current = StateSequence::new(states, 1);
    let fd = forward_difference(&current, &init, config.norm)?;

    let mut trace = TraceBuilder::new(Method::GaussSeidel, config.norm, ground_truth);
    trace.push(1, fd, current.clone());
    Ok(SolveResult {
        states: current,
        trace: trace.finish(StoppingReason::ToleranceMet),
        sweeps_used: 1,
        block_sweeps: None,
    })
}

/// Jacobi iteration: every sweep computes `s^k_t = h_t(u, s^{k-1}_{1:t-1})`
/// for all `t` in parallel from the previous snapshot, stopping at the cap
/// `k = T` or when the forward difference falls under `epsilon`.
pub fn solve_jacobi(
    system: &RecurrenceSystem,
    input: &[f64],
    config: &SolverConfig,
    ground_truth: Option<&StateSequence>,
) -> Result<SolveResult> {
    system.check_input(input)?;
    config.validate()?;
    check_truth_shape(system, ground_truth)?;
    let cap = config.effective_cap(system.t_len())?;

    run_with_workers(config.workers, || {
        let mut prev = config.initializer.build(system);
        let mut trace = TraceBuilder::new(Method::Jacobi, config.norm, ground_truth);
        let mut stopping = StoppingReason::CapReached;

        for k in 1..=cap {
            let results: Vec<Result<Vec<f64>>> = (1..=system.t_len())
                .into_par_iter()
                .map(|t| system.eval_step(t, input, &prev.states[..t - 1]))
                .collect();
            let current = StateSequence::new(first_error(results)?, k);
            let fd = diff_norm(&current.states, &prev.states, config.norm);
            trace.push(k, fd, current.clone());

            let converged = if config.epsilon == 0.0 {
                current.bitwise_eq(&prev)
            } else {
                fd < config.epsilon
            };
            prev = current;
            if converged {
                stopping = StoppingReason::ToleranceMet;
                break;
            }
            if k == cap && config.epsilon == 0.0 {
                // the cap is a hard exactness guarantee
                stopping = StoppingReason::ToleranceMet;
            }
        }

        let sweeps_used = trace.records.len();
        Ok(SolveResult {
            states: prev,
            trace: trace.finish(stopping),
            sweeps_used,
            block_sweeps: None,
        })
    })?
}

/// Jacobi-Gauss-Seidel: per outer sweep, all `M` blocks are updated in
/// parallel from the previous snapshot while states inside each block are
/// updated sequentially with the freshest in-block values:
/// `s^k_j <- h_j(u, s^{k-1}_{1:a-1}, s^k_{a:j-1})`. Stops at `k = M` or on
/// a small forward difference.
pub fn solve_jacobi_gs(
    system: &RecurrenceSystem,
    input: &[f64],
    partition: &BlockPartition,
    config: &SolverConfig,
    ground_truth: Option<&StateSequence>,
) -> Result<SolveResult> {
    system.check_input(input)?;
    config.validate()?;
    check_truth_shape(system, ground_truth)?;
    check_partition(system, partition)?;
    let cap = config.effective_cap(partition.len())?;

    run_with_workers(config.workers, || {
        let mut prev = config.initializer.build(system);
        let mut trace = TraceBuilder::new(Method::JacobiGs, config.norm, ground_truth);
        let mut stopping = StoppingReason::CapReached;

        for k in 1..=cap {
            let block_results: Vec<Result<Vec<Vec<f64>>>> = partition
                .blocks()
                .par_iter()
                .map(|&(a, b)| {
                    // prefix from the previous sweep, then in-block GS updates
                    let mut work: Vec<Vec<f64>> = prev.states[..a - 1].to_vec();
                    for j in a..=b {
                        let next = system.eval_step(j, input, &work)?;
                        work.push(next);
                    }
                    Ok(work.split_off(a - 1))
                })
                .collect();

            let mut states = Vec::with_capacity(system.t_len());
            let mut first_err: Option<Error> = None;
            for r in block_results {
                match r {
                    Ok(mut block) => states.append(&mut block),
                    Err(e) => {
                        first_err = bubble_min_step(first_err, e);
                    }
                }
            }
            if let Some(e) = first_err {
                return Err(e);
            }

            let current = StateSequence::new(states, k);
            let fd = diff_norm(&current.states, &prev.states, config.norm);
            trace.push(k, fd, current.clone());

            let converged = if config.epsilon == 0.0 {
                current.bitwise_eq(&prev)
            } else {
                fd < config.epsilon
            };
            prev = current;
            if converged {
                stopping = StoppingReason::ToleranceMet;
                break;
            }
            if k == cap && config.epsilon == 0.0 {
                stopping = StoppingReason::ToleranceMet;
            }
        }

        let sweeps_used = trace.records.len();
        Ok(SolveResult {
            states: prev,
            trace: trace.finish(stopping),
            sweeps_used,
            block_sweeps: None,
        })
    })?
}

/// Gauss-Seidel-Jacobi: blocks are finalized in order; inside block
/// `B_i = [a, b]`, Jacobi sweeps `s^k_j <- h_j(u, s_{1:a-1}, s^{k-1}_{a:j-1})`
/// run in parallel against the finalized earlier blocks until `k = |B_i|`
/// or the block's forward difference is small. Trace records count inner
/// sweeps across all blocks with a single increasing index.
pub fn solve_gs_jacobi(
    system: &RecurrenceSystem,
    input: &[f64],
    partition: &BlockPartition,
    config: &SolverConfig,
    ground_truth: Option<&StateSequence>,
) -> Result<SolveResult> {
    system.check_input(input)?;
    config.validate()?;
    check_truth_shape(system, ground_truth)?;
    check_partition(system, partition)?;
    // override legality is judged against the largest per-block cap
    config.effective_cap(partition.max_block_len())?;

    run_with_workers(config.workers, || {
        let init = config.initializer.build(system);
        let mut outer: Vec<Vec<f64>> = init.states.clone();
        let mut trace = TraceBuilder::new(Method::GsJacobi, config.norm, ground_truth);
        let mut block_sweeps = Vec::with_capacity(partition.len());
        let mut global_sweep = 0usize;
        let mut any_capped = false;

        for (i, &(a, b)) in partition.blocks().iter().enumerate() {
            let cap_i = config.effective_cap(partition.block_len(i))?;
            // per-block initialization reuses the global initializer values
            let mut block_prev: Vec<Vec<f64>> = init.states[a - 1..b].to_vec();
            let mut k = 0usize;

            loop {
                k += 1;
                global_sweep += 1;

                // finalized earlier blocks, then the previous block iterate
                let mut work: Vec<Vec<f64>> = outer[..a - 1].to_vec();
                work.extend(block_prev.iter().cloned());
                let results: Vec<Result<Vec<f64>>> = (a..=b)
                    .into_par_iter()
                    .map(|j| system.eval_step(j, input, &work[..j - 1]))
                    .collect();
                let block_new = first_error(results)?;

                let fd = diff_norm(&block_new, &block_prev, config.norm);
                let mut snapshot = outer.clone();
                snapshot[a - 1..b].clone_from_slice(&block_new);
                trace.push(global_sweep, fd, StateSequence::new(snapshot, global_sweep));

                let converged = if config.epsilon == 0.0 {
                    states_bitwise_eq(&block_new, &block_prev)
                } else {
                    fd < config.epsilon
                };
                block_prev = block_new;
                if converged {
                    break;
                }
                if k == cap_i {
                    if config.epsilon > 0.0 {
                        any_capped = true;
                    }
                    break;
                }
            }

            block_sweeps.push(k);
            outer[a - 1..b].clone_from_slice(&block_prev);
        }

        let stopping = if any_capped {
            StoppingReason::CapReached
        } else {
            StoppingReason::ToleranceMet
        };
        let sweeps_used = trace.records.len();
        Ok(SolveResult {
            states: StateSequence::new(outer, global_sweep),
            trace: trace.finish(stopping),
            sweeps_used,
            block_sweeps: Some(block_sweeps),
        })
    })?
}

fn check_partition(system: &RecurrenceSystem, partition: &BlockPartition) -> Result<()> {
    if partition.t_len() != system.t_len() {
        return Err(Error::Partition {
            reason: format!(
                "partition covers [1, {}] but the system has t = {}",
                partition.t_len(),
                system.t_len()
            ),
        });
    }
    Ok(())
}

/// Keeps the error with the smallest step index so reports are stable.
fn bubble_min_step(current: Option<Error>, candidate: Error) -> Option<Error> {
    fn step_of(e: &Error) -> usize {
        match e {
            Error::NonFinite { step } | Error::EvaluatorDim { step, .. } => *step,
            _ => usize::MAX,
        }
    }
    match current {
        None => Some(candidate),
        Some(c) if step_of(&candidate) < step_of(&c) => Some(candidate),
        some => some,
    }
}
