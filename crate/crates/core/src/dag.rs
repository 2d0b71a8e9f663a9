//! Dependency-graph analysis and an idealized parallel cost simulator.
//!
//! The graph has `T + 1` nodes (`u` is node 0, states are 1..T) and an
//! edge `j -> t` whenever step `t` declares `j` in its dependency mask.
//! All edges run from lower to strictly higher index, so the graph is
//! acyclic by construction. The dependency depth — the longest directed
//! path, counted in edges, needed to reach any state — upper-bounds the
//! number of Jacobi sweeps to exact convergence.
//!
//! The cost model charges each evaluation of `h_t` a fixed cost: one value
//! when executed in isolation (`parallel_cost`) and one when executed
//! sequentially where caching can help (`serial_cost`). Times assume at
//! least `T` identical processors and ignore data movement:
//!
//! - feedforward: sum of parallel costs; cached variant sums serial costs;
//! - Jacobi: sweeps times the slowest single step;
//! - Jacobi-GS: sweeps times the slowest block, where a block costs the
//!   sum of its serial costs (in-block updates are sequential and cached);
//! - GS-Jacobi: per block, inner sweeps times the slowest step in the
//!   block at parallel cost (parallel lanes cannot share caches).

use crate::error::{Error, Result};
use crate::partition::BlockPartition;
use crate::solver::{Method, SolveResult};
use crate::system::RecurrenceSystem;

/// Dependency DAG over `{u, s_1, .., s_T}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    preds: Vec<Vec<usize>>,
}

impl DependencyGraph {
    /// Builds a graph from explicit predecessor lists; `preds[t-1]` are
    /// the nodes feeding state `t` (0 denotes `u`). Entries must be below
    /// their state index.
    pub fn new(preds: Vec<Vec<usize>>) -> Result<Self> {
        for (i, list) in preds.iter().enumerate() {
            let t = i + 1;
            if let Some(&bad) = list.iter().find(|&&j| j >= t) {
                return Err(Error::MaskNotTriangular { step: t, index: bad });
            }
        }
        Ok(Self { preds })
    }

    pub fn t_len(&self) -> usize {
        self.preds.len()
    }

    /// Predecessors of state `t` (1-based).
    pub fn predecessors(&self, t: usize) -> &[usize] {
        &self.preds[t - 1]
    }

    /// All edges `(from, to)` in index order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, list) in self.preds.iter().enumerate() {
            for &j in list {
                out.push((j, i + 1));
            }
        }
        out
    }
}

/// Graph of a system's declared dependency mask.
pub fn build_dependency_graph(system: &RecurrenceSystem) -> DependencyGraph {
    // the mask is validated at system construction
    DependencyGraph {
        preds: system.dependency_mask().to_vec(),
    }
}

/// Longest directed path (in edges) from `u` to any state, computed by
/// dynamic programming in index order. A state with no predecessors still
/// costs one evaluation, so it sits at level 1.
pub fn dependency_depth(graph: &DependencyGraph) -> usize {
    levels(graph).into_iter().max().unwrap_or(0)
}

fn levels(graph: &DependencyGraph) -> Vec<usize> {
    let mut level = vec![0usize; graph.t_len() + 1];
    for t in 1..=graph.t_len() {
        level[t] = 1 + graph
            .predecessors(t)
            .iter()
            .map(|&j| level[j])
            .max()
            .unwrap_or(0);
    }
    level.remove(0);
    level
}

/// Parallel Jacobi sweeps needed to converge, predicted from structure
/// alone. The measured exact-convergence sweep never exceeds this, for any
/// initializer.
pub fn predict_jacobi_sweeps(graph: &DependencyGraph) -> usize {
    dependency_depth(graph)
}

/// Outer-sweep prediction for Jacobi-GS: the depth of the block-condensed
/// graph. Dependencies inside one block resolve within a single outer
/// sweep, so only edges crossing block boundaries count.
pub fn predict_jacobi_gs_sweeps(
    graph: &DependencyGraph,
    partition: &BlockPartition,
) -> Result<usize> {
    check_partition_len(graph.t_len(), partition)?;
    let mut block_level = vec![0usize; partition.len()];
    for (i, &(a, b)) in partition.blocks().iter().enumerate() {
        let mut lvl = 1usize;
        for t in a..=b {
            for &j in graph.predecessors(t) {
                if j >= a {
                    continue; // in-block or forward edges do not delay the block
                }
                if j == 0 {
                    continue; // u is available from the start
                }
                let pred_block = partition.block_of(j).unwrap();
                lvl = lvl.max(block_level[pred_block] + 1);
            }
        }
        block_level[i] = lvl;
    }
    Ok(block_level.into_iter().max().unwrap_or(0))
}

/// Per-block inner-sweep prediction for GS-Jacobi: the dependency depth of
/// each block's internal subgraph, given that earlier blocks are final.
pub fn predict_gs_jacobi_block_sweeps(
    graph: &DependencyGraph,
    partition: &BlockPartition,
) -> Result<Vec<usize>> {
    check_partition_len(graph.t_len(), partition)?;
    let mut out = Vec::with_capacity(partition.len());
    for &(a, b) in partition.blocks() {
        let mut local = vec![0usize; b - a + 2];
        let mut depth = 0usize;
        for t in a..=b {
            let lvl = 1 + graph
                .predecessors(t)
                .iter()
                .filter(|&&j| j >= a)
                .map(|&j| local[j - a + 1])
                .max()
                .unwrap_or(0);
            local[t - a + 1] = lvl;
            depth = depth.max(lvl);
        }
        out.push(depth);
    }
    Ok(out)
}

fn check_partition_len(t_len: usize, partition: &BlockPartition) -> Result<()> {
    if partition.t_len() != t_len {
        return Err(Error::Partition {
            reason: format!(
                "partition covers [1, {}] but the graph has t = {t_len}",
                partition.t_len()
            ),
        });
    }
    Ok(())
}

/// Per-step evaluation costs. `parallel[t-1]` is the cost of one isolated
/// evaluation of `h_t`; `serial[t-1]` its cost in a sequential schedule
/// where caching may apply (conventionally at most the parallel cost).
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    parallel: Vec<f64>,
    serial: Vec<f64>,
}

impl CostModel {
    pub fn new(parallel: Vec<f64>, serial: Vec<f64>) -> Result<Self> {
        if parallel.is_empty() {
            return Err(Error::Cost {
                reason: "cost lists must not be empty".into(),
            });
        }
        if parallel.len() != serial.len() {
            return Err(Error::Cost {
                reason: format!(
                    "parallel and serial lists differ in length ({} vs {})",
                    parallel.len(),
                    serial.len()
                ),
            });
        }
        for v in parallel.iter().chain(&serial) {
            if !v.is_finite() || *v <= 0.0 {
                return Err(Error::Cost {
                    reason: format!("costs must be finite and strictly positive, got {v}"),
                });
            }
        }
        Ok(Self { parallel, serial })
    }

    /// No caching benefit: serial costs equal parallel costs.
    pub fn from_parallel(parallel: Vec<f64>) -> Result<Self> {
        let serial = parallel.clone();
        Self::new(parallel, serial)
    }

    /// Unit cost everywhere.
    pub fn uniform(t_len: usize) -> Result<Self> {
        Self::from_parallel(vec![1.0; t_len])
    }

    pub fn parallel(&self) -> &[f64] {
        &self.parallel
    }

    pub fn serial(&self) -> &[f64] {
        &self.serial
    }

    pub fn t_len(&self) -> usize {
        self.parallel.len()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::Cost {
                reason: format!("scale factor must be finite and positive, got {c}"),
            });
        }
        Self::new(
            self.parallel.iter().map(|v| v * c).collect(),
            self.serial.iter().map(|v| v * c).collect(),
        )
    }
}

fn sum(values: &[f64]) -> f64 {
    values.iter().sum()
}

fn max(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, &v| m.max(v))
}

/// Cost of one Jacobi parallel iteration: the slowest single step.
pub fn jacobi_iteration_cost(costs: &CostModel) -> f64 {
    max(costs.parallel())
}

/// Cost of one Jacobi-GS outer sweep: the slowest block, each block being
/// the sum of its serial step costs.
pub fn jacobi_gs_iteration_cost(costs: &CostModel, partition: &BlockPartition) -> Result<f64> {
    check_costs_partition(costs, partition)?;
    Ok(partition
        .blocks()
        .iter()
        .map(|&(a, b)| sum(&costs.serial()[a - 1..b]))
        .fold(0.0, f64::max))
}

/// Cost of one GS-Jacobi inner sweep in block `block` (0-based): the
/// slowest step of that block at parallel cost.
pub fn gs_jacobi_iteration_cost(
    costs: &CostModel,
    partition: &BlockPartition,
    block: usize,
) -> Result<f64> {
    check_costs_partition(costs, partition)?;
    if block >= partition.len() {
        return Err(Error::Partition {
            reason: format!("block index {block} out of range (m = {})", partition.len()),
        });
    }
    let (a, b) = partition.blocks()[block];
    Ok(max(&costs.parallel()[a - 1..b]))
}

fn check_costs_partition(costs: &CostModel, partition: &BlockPartition) -> Result<()> {
    if costs.t_len() != partition.t_len() {
        return Err(Error::Cost {
            reason: format!(
                "cost model has t = {} but partition covers [1, {}]",
                costs.t_len(),
                partition.t_len()
            ),
        });
    }
    Ok(())
}

/// A method together with the iteration counts needed to time it. Block
/// methods carry their partition; building a schedule without one is
/// rejected upstream where methods are parsed.
#[derive(Debug, Clone)]
pub enum Schedule<'a> {
    Feedforward,
    FeedforwardCached,
    Jacobi {
        sweeps: usize,
    },
    JacobiGs {
        sweeps: usize,
        partition: &'a BlockPartition,
    },
    GsJacobi {
        block_sweeps: &'a [usize],
        partition: &'a BlockPartition,
    },
}

/// Total simulated wall-clock of a schedule under the ideal computation
/// model.
pub fn simulate_schedule_time(schedule: &Schedule<'_>, costs: &CostModel) -> Result<f64> {
    match schedule {
        Schedule::Feedforward => Ok(sum(costs.parallel())),
        Schedule::FeedforwardCached => Ok(sum(costs.serial())),
        Schedule::Jacobi { sweeps } => {
            if *sweeps == 0 {
                return Err(Error::ZeroIterations);
            }
            Ok(*sweeps as f64 * jacobi_iteration_cost(costs))
        }
        Schedule::JacobiGs { sweeps, partition } => {
            if *sweeps == 0 {
                return Err(Error::ZeroIterations);
            }
            Ok(*sweeps as f64 * jacobi_gs_iteration_cost(costs, partition)?)
        }
        Schedule::GsJacobi {
            block_sweeps,
            partition,
        } => {
            if block_sweeps.len() != partition.len() {
                return Err(Error::Partition {
                    reason: format!(
                        "{} block sweep counts for {} blocks",
                        block_sweeps.len(),
                        partition.len()
                    ),
                });
            }
            let mut total = 0.0;
            for (i, &k) in block_sweeps.iter().enumerate() {
                if k == 0 {
                    return Err(Error::ZeroIterations);
                }
                total += k as f64 * gs_jacobi_iteration_cost(costs, partition, i)?;
            }
            Ok(total)
        }
    }
}

/// Which cost lane a trace is charged on. Feedforward and its cached
/// variant both apply to Gauss-Seidel traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostBasis {
    Feedforward,
    FeedforwardCached,
    Jacobi,
    JacobiGs,
    GsJacobi,
}

/// Fills each trace record's `sim_cost` with the per-sweep charge of the
/// given basis. Block bases need the partition used by the solve.
pub fn fill_solve_costs(
    result: &mut SolveResult,
    basis: CostBasis,
    costs: &CostModel,
    partition: Option<&BlockPartition>,
) -> Result<()> {
    if costs.t_len() != result.states.states.len() {
        return Err(Error::Cost {
            reason: format!(
                "cost model has t = {} but the solve produced {} states",
                costs.t_len(),
                result.states.states.len()
            ),
        });
    }
    let need_partition = || {
        partition.ok_or_else(|| Error::Partition {
            reason: "a partition is required to charge block-method costs".into(),
        })
    };
    match basis {
        CostBasis::Feedforward => {
            let c = sum(costs.parallel());
            for r in &mut result.trace.records {
                r.sim_cost = Some(c);
            }
        }
        CostBasis::FeedforwardCached => {
            let c = sum(costs.serial());
            for r in &mut result.trace.records {
                r.sim_cost = Some(c);
            }
        }
        CostBasis::Jacobi => {
            let c = jacobi_iteration_cost(costs);
            for r in &mut result.trace.records {
                r.sim_cost = Some(c);
            }
        }
        CostBasis::JacobiGs => {
            let c = jacobi_gs_iteration_cost(costs, need_partition()?)?;
            for r in &mut result.trace.records {
                r.sim_cost = Some(c);
            }
        }
        CostBasis::GsJacobi => {
            let partition = need_partition()?;
            let block_sweeps = result.block_sweeps.as_deref().ok_or_else(|| Error::Config {
                reason: "trace has no per-block sweep counts; was this a gs-jacobi solve?".into(),
            })?;
            let mut per_record = Vec::with_capacity(result.trace.records.len());
            for (i, &k) in block_sweeps.iter().enumerate() {
                let c = gs_jacobi_iteration_cost(costs, partition, i)?;
                per_record.extend(std::iter::repeat_n(c, k));
            }
            if per_record.len() != result.trace.records.len() {
                return Err(Error::Config {
                    reason: "block sweep counts do not match the trace length".into(),
                });
            }
            for (r, c) in result.trace.records.iter_mut().zip(per_record) {
                r.sim_cost = Some(c);
            }
        }
    }
    debug_assert!(basis_matches(basis, result.trace.method));
    Ok(())
}

fn basis_matches(basis: CostBasis, method: Method) -> bool {
    matches!(
        (basis, method),
        (CostBasis::Feedforward, Method::GaussSeidel)
            | (CostBasis::FeedforwardCached, Method::GaussSeidel)
            | (CostBasis::Jacobi, Method::Jacobi)
            | (CostBasis::JacobiGs, Method::JacobiGs)
            | (CostBasis::GsJacobi, Method::GsJacobi)
    )
}

/// Ratio of parallel-iteration counts: how many times fewer iterations the
/// method needs than the baseline.
pub fn theoretical_speedup(baseline_iterations: usize, method_iterations: usize) -> Result<f64> {
    if baseline_iterations == 0 || method_iterations == 0 {
        return Err(Error::ZeroIterations);
    }
    Ok(baseline_iterations as f64 / method_iterations as f64)
}
