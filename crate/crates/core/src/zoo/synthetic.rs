//! The three synthetic chains used to study how dependency structure
//! bounds Jacobi convergence: fully independent states, a single long-skip
//! hub, and a Markov chain.
//!
//! Skip and Markov steps use `x + a * tanh(x) + b` with seeded `a > 0`,
//! `b`. The slope is at least 1 everywhere, so a difference between two
//! trajectories can never shrink below floating-point resolution while it
//! travels down the chain; the dependency-depth lower bound therefore
//! binds exactly: one sweep for independent, two for skip, `T` for Markov.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::system::RecurrenceSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainKind {
    /// Every state reads only the input.
    Independent,
    /// `s_1` reads `u`; every later state reads only `s_1`.
    Skip,
    /// `s_1` reads `u`; every later state reads only its predecessor.
    Markov,
}

impl ChainKind {
    pub fn name(self) -> &'static str {
        match self {
            ChainKind::Independent => "independent",
            ChainKind::Skip => "skip",
            ChainKind::Markov => "markov",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticChainSpec {
    pub kind: ChainKind,
    pub t_len: usize,
}

pub fn make_synthetic(spec: &SyntheticChainSpec, seed: u64) -> Result<RecurrenceSystem> {
    if spec.t_len == 0 {
        return Err(Error::Model {
            reason: "chain length must be at least 1".into(),
        });
    }
    let t_len = spec.t_len;
    let kind = spec.kind;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gains: Arc<Vec<f64>> = Arc::new((0..t_len).map(|_| rng.gen_range(0.1..0.5)).collect());
    let offsets: Arc<Vec<f64>> = Arc::new((0..t_len).map(|_| rng.gen_range(-0.3..0.3)).collect());

    let mask = (1..=t_len)
        .map(|t| match kind {
            ChainKind::Independent => vec![0],
            ChainKind::Skip => {
                if t == 1 {
                    vec![0]
                } else {
                    vec![1]
                }
            }
            ChainKind::Markov => {
                if t == 1 {
                    vec![0]
                } else {
                    vec![t - 1]
                }
            }
        })
        .collect();

    let eval = move |t: usize, u: &[f64], s: &[Vec<f64>]| {
        let a = gains[t - 1];
        let b = offsets[t - 1];
        let x = match kind {
            ChainKind::Independent => u[0],
            ChainKind::Skip => {
                if t == 1 {
                    u[0]
                } else {
                    s[0][0]
                }
            }
            ChainKind::Markov => {
                if t == 1 {
                    u[0]
                } else {
                    s[t - 2][0]
                }
            }
        };
        match kind {
            // bounded output; structure alone makes depth 1
            ChainKind::Independent => vec![(x * (1.0 + a)).tanh() + b],
            // slope >= 1 keeps the dependence on the read state alive
            ChainKind::Skip | ChainKind::Markov => vec![x + a * x.tanh() + b],
        }
    };

    RecurrenceSystem::new(1, vec![1; t_len], mask, Arc::new(eval))
}
