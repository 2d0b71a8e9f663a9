//! The recurrence-system contract and its ground-truth evaluation.
//!
//! A system produces states `s_1 .. s_T` from an input `u` through
//! `s_t = h_t(u, s_1 .. s_{t-1})`. Written as equations,
//! `h_t(u, s_{1:t-1}) - s_t = 0` is a triangular system: equation `t`
//! involves no unknown with index above `t`, so sequential substitution
//! ([`feedforward_evaluate`]) produces its unique solution.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Step evaluator: `(t, u, s_1..s_{t-1}) -> s_t` with `t` counted from 1.
///
/// Implementations must be pure and deterministic: identical arguments
/// produce bitwise-identical outputs, and the function may be called from
/// several worker threads at once.
pub type StepEvaluator = dyn Fn(usize, &[f64], &[Vec<f64>]) -> Vec<f64> + Send + Sync;

/// A recurrence relation `s_t = h_t(u, s_{1:t-1})`, `1 <= t <= T`.
///
/// The declared `dependency_mask` lists, for every step `t`, which earlier
/// indices the evaluator may read; index 0 stands for the input `u`. The
/// mask is declared by the system author and can be verified empirically
/// with [`check_triangularity`].
#[derive(Clone)]
pub struct RecurrenceSystem {
    input_dim: usize,
    state_dims: Vec<usize>,
    dependency_mask: Vec<Vec<usize>>,
    evaluator: Arc<StepEvaluator>,
}

impl std::fmt::Debug for RecurrenceSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RecurrenceSystem")
            .field("t_len", &self.t_len())
            .field("input_dim", &self.input_dim)
            .field("state_dims", &self.state_dims)
            .field("dependency_mask", &self.dependency_mask)
            .finish_non_exhaustive()
    }
}

impl RecurrenceSystem {
    /// Builds a system, validating shapes and the triangularity of the mask.
    ///
    /// `dependency_mask[t-1]` holds the indices readable by step `t`; every
    /// entry must be strictly below `t` (0 denotes `u`).
    pub fn new(
        input_dim: usize,
        state_dims: Vec<usize>,
        dependency_mask: Vec<Vec<usize>>,
        evaluator: Arc<StepEvaluator>,
    ) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::InvalidArgument {
                reason: "input dimension must be positive".into(),
            });
        }
        if state_dims.is_empty() {
            return Err(Error::InvalidArgument {
                reason: "a system needs at least one state".into(),
            });
        }
        if let Some(index) = state_dims.iter().position(|&d| d == 0) {
            return Err(Error::StateDim {
                index: index + 1,
                expected: 1,
                got: 0,
            });
        }
        if dependency_mask.len() != state_dims.len() {
            return Err(Error::StateCount {
                expected: state_dims.len(),
                got: dependency_mask.len(),
            });
        }
        let mut mask = Vec::with_capacity(dependency_mask.len());
        for (i, entries) in dependency_mask.into_iter().enumerate() {
            let t = i + 1;
            let mut sorted: Vec<usize> = entries;
            sorted.sort_unstable();
            sorted.dedup();
            if let Some(&bad) = sorted.iter().find(|&&j| j >= t) {
                return Err(Error::MaskNotTriangular { step: t, index: bad });
            }
            mask.push(sorted);
        }
        Ok(Self {
            input_dim,
            state_dims,
            dependency_mask: mask,
            evaluator,
        })
    }

    /// Number of states `T`.
    pub fn t_len(&self) -> usize {
        self.state_dims.len()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn state_dims(&self) -> &[usize] {
        &self.state_dims
    }

    /// Sorted readable indices per step; `mask[t-1]` belongs to step `t`.
    pub fn dependency_mask(&self) -> &[Vec<usize>] {
        &self.dependency_mask
    }

    pub fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim {
            return Err(Error::InputDim {
                expected: self.input_dim,
                got: input.len(),
            });
        }
        Ok(())
    }

    fn check_states(&self, states: &[Vec<f64>]) -> Result<()> {
        if states.len() != self.t_len() {
            return Err(Error::StateCount {
                expected: self.t_len(),
                got: states.len(),
            });
        }
        for (i, s) in states.iter().enumerate() {
            if s.len() != self.state_dims[i] {
                return Err(Error::StateDim {
                    index: i + 1,
                    expected: self.state_dims[i],
                    got: s.len(),
                });
            }
        }
        Ok(())
    }

    /// Evaluates `h_t` and validates the output shape and finiteness.
    ///
    /// `predecessors` must hold at least `t - 1` entries; only the first
    /// `t - 1` are passed on.
    pub fn eval_step(&self, t: usize, input: &[f64], predecessors: &[Vec<f64>]) -> Result<Vec<f64>> {
        debug_assert!(t >= 1 && t <= self.t_len());
        debug_assert!(predecessors.len() >= t - 1);
        let out = (self.evaluator)(t, input, &predecessors[..t - 1]);
        if out.len() != self.state_dims[t - 1] {
            return Err(Error::EvaluatorDim {
                step: t,
                expected: self.state_dims[t - 1],
                got: out.len(),
            });
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: t });
        }
        Ok(out)
    }

    /// Raw evaluator call without shape or finiteness checks. Used by the
    /// triangularity checker, which compares outputs bit for bit.
    fn eval_raw(&self, t: usize, input: &[f64], predecessors: &[Vec<f64>]) -> Vec<f64> {
        (self.evaluator)(t, input, &predecessors[..t - 1])
    }
}

/// The full assignment `s_1 .. s_T` at some iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSequence {
    pub states: Vec<Vec<f64>>,
    pub iteration_index: usize,
}

impl StateSequence {
    pub fn new(states: Vec<Vec<f64>>, iteration_index: usize) -> Self {
        Self {
            states,
            iteration_index,
        }
    }

    /// True when every entry matches bit for bit (iteration indices are
    /// bookkeeping and do not participate).
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        states_bitwise_eq(&self.states, &other.states)
    }

    /// Bitwise comparison restricted to the first `k` states.
    pub fn bitwise_eq_prefix(&self, other: &Self, k: usize) -> bool {
        let k = k.min(self.states.len());
        if other.states.len() < k {
            return false;
        }
        states_bitwise_eq(&self.states[..k], &other.states[..k])
    }
}

/// Bit-for-bit equality of two state lists.
pub fn states_bitwise_eq(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.len() == y.len() && x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits())
        })
}

/// Norm applied over the concatenation of all state entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    LInf,
    L2,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::LInf => "linf",
            NormKind::L2 => "l2",
        }
    }
}

impl std::fmt::Display for NormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Norm of the elementwise difference between two shape-identical state
/// lists. Shapes must already be verified by the caller.
pub(crate) fn diff_norm(a: &[Vec<f64>], b: &[Vec<f64>], norm: NormKind) -> f64 {
    match norm {
        NormKind::LInf => a
            .iter()
            .zip(b)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
            .fold(0.0, f64::max),
        NormKind::L2 => a
            .iter()
            .zip(b)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)))
            .sum::<f64>()
            .sqrt(),
    }
}

fn check_same_shape(a: &StateSequence, b: &StateSequence) -> Result<()> {
    if a.states.len() != b.states.len() {
        return Err(Error::StateCount {
            expected: a.states.len(),
            got: b.states.len(),
        });
    }
    for (i, (x, y)) in a.states.iter().zip(&b.states).enumerate() {
        if x.len() != y.len() {
            return Err(Error::StateDim {
                index: i + 1,
                expected: x.len(),
                got: y.len(),
            });
        }
    }
    Ok(())
}

/// Sequential ground-truth evaluation: computes `s_t = h_t(u, s_{1:t-1})`
/// in order and returns the unique solution of the triangular system.
pub fn feedforward_evaluate(system: &RecurrenceSystem, input: &[f64]) -> Result<StateSequence> {
    system.check_input(input)?;
    let mut states: Vec<Vec<f64>> = Vec::with_capacity(system.t_len());
    for t in 1..=system.t_len() {
        let next = system.eval_step(t, input, &states)?;
        states.push(next);
    }
    Ok(StateSequence::new(states, 0))
}

/// Residual of the triangular system at a candidate assignment: entry `t`
/// equals `h_t(u, candidate_{1:t-1}) - candidate_t`.
pub fn residual(
    system: &RecurrenceSystem,
    input: &[f64],
    candidate: &StateSequence,
) -> Result<Vec<Vec<f64>>> {
    system.check_input(input)?;
    system.check_states(&candidate.states)?;
    let mut out = Vec::with_capacity(system.t_len());
    for t in 1..=system.t_len() {
        let ht = system.eval_step(t, input, &candidate.states)?;
        let row: Vec<f64> = ht
            .iter()
            .zip(&candidate.states[t - 1])
            .map(|(h, s)| h - s)
            .collect();
        out.push(row);
    }
    Ok(out)
}

/// The stopping statistic: norm of the change between two assignments.
/// Symmetric in its arguments.
pub fn forward_difference(a: &StateSequence, b: &StateSequence, norm: NormKind) -> Result<f64> {
    check_same_shape(a, b)?;
    Ok(diff_norm(&a.states, &b.states, norm))
}

/// One observed mask violation: step `step` reacted to a perturbation of
/// state `index`, which its declared mask does not cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TriangularityViolation {
    pub step: usize,
    pub index: usize,
}

/// Outcome of [`check_triangularity`]. Violations are report content, not
/// errors.
#[derive(Debug, Clone)]
pub struct TriangularityReport {
    pub trials: usize,
    pub violations: Vec<TriangularityViolation>,
    /// Steps whose evaluator returned different bits on identical calls.
    pub nondeterministic_steps: Vec<usize>,
}

impl TriangularityReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.nondeterministic_steps.is_empty()
    }
}

/// Empirically validates the declared dependency mask.
///
/// For each trial a random assignment is drawn (inputs from `(0, 1)`,
/// states from `(-1, 1)`, both compatible with every model-zoo system);
/// each state outside a step's mask is perturbed and the step re-evaluated.
/// Any bit of output change is recorded as a violation at `(step, index)`.
/// States at or above the step index are never passed to an evaluator, so
/// their invariance holds by construction. Each step is also evaluated
/// twice on identical arguments to confirm determinism.
pub fn check_triangularity(
    system: &RecurrenceSystem,
    trials: usize,
    seed: u64,
) -> Result<TriangularityReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument {
            reason: "trials must be at least 1".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations: BTreeSet<TriangularityViolation> = BTreeSet::new();
    let mut nondeterministic: BTreeSet<usize> = BTreeSet::new();

    for _ in 0..trials {
        let input: Vec<f64> = (0..system.input_dim())
            .map(|_| rng.gen_range(f64::EPSILON..1.0))
            .collect();
        let states: Vec<Vec<f64>> = system
            .state_dims()
            .iter()
            .map(|&d| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();

        for t in 1..=system.t_len() {
            let baseline = system.eval_raw(t, &input, &states);
            let again = system.eval_raw(t, &input, &states);
            if !bits_eq(&baseline, &again) {
                nondeterministic.insert(t);
            }
            for j in 1..t {
                if system.dependency_mask()[t - 1].contains(&j) {
                    continue;
                }
                let mut perturbed = states.clone();
                let bump = rng.gen_range(0.25..1.0);
                for v in &mut perturbed[j - 1] {
                    *v += bump;
                }
                let out = system.eval_raw(t, &input, &perturbed);
                if !bits_eq(&baseline, &out) {
                    violations.insert(TriangularityViolation { step: t, index: j });
                }
            }
        }
    }

    Ok(TriangularityReport {
        trials,
        violations: violations.into_iter().collect(),
        nondeterministic_steps: nondeterministic.into_iter().collect(),
    })
}

fn bits_eq(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}
