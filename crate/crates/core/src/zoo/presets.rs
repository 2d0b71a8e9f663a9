//! Compact seeded constructors over every zoo family, used by test
//! harnesses that need many varied systems without spelling out specs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::system::RecurrenceSystem;

use super::linear::{make_linear_triangular, LinearTriangularSpec, SparsityMask};
use super::made::{make_made, MadeSpec};
use super::mlp::{make_layered_mlp, Activation, Connectivity, LayeredMlpSpec};
use super::synthetic::{make_synthetic, ChainKind, SyntheticChainSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Linear,
    MlpChain,
    MlpDense,
    Made,
    Independent,
    Skip,
    Markov,
}

pub const ALL_FAMILIES: [Family; 7] = [
    Family::Linear,
    Family::MlpChain,
    Family::MlpDense,
    Family::Made,
    Family::Independent,
    Family::Skip,
    Family::Markov,
];

impl Family {
    /// Largest sequence length the family stays desk-cheap at; the
    /// network families evaluate a full pass per step.
    pub fn max_t(self) -> usize {
        match self {
            Family::Made => 32,
            _ => 64,
        }
    }
}

/// Builds a seeded random member of the family with `t` states. The same
/// `(family, t, seed)` triple always yields the same system.
pub fn sample_system(family: Family, t: usize, seed: u64) -> RecurrenceSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    match family {
        Family::Linear => {
            let state_dim = rng.gen_range(1..=3);
            let input_dim = rng.gen_range(1..=2);
            let density = rng.gen_range(0.2..0.9);
            let spec = LinearTriangularSpec::uniform(
                t,
                state_dim,
                input_dim,
                SparsityMask::Random { density },
            );
            make_linear_triangular(&spec, seed).expect("valid linear spec")
        }
        Family::MlpChain | Family::MlpDense => {
            let width = rng.gen_range(1..=3);
            let input_dim = rng.gen_range(1..=2);
            let activation = match rng.gen_range(0..3) {
                0 => Activation::Identity,
                1 => Activation::Tanh,
                _ => Activation::Rectifier,
            };
            let connectivity = if family == Family::MlpChain {
                Connectivity::Chain
            } else {
                Connectivity::Dense
            };
            let spec = LayeredMlpSpec::uniform(t, width, input_dim, activation, connectivity);
            make_layered_mlp(&spec, seed).expect("valid mlp spec")
        }
        Family::Made => {
            let h = (t.max(2) - 1).max(4) + rng.gen_range(0..4);
            let spec = MadeSpec {
                t_len: t,
                hidden: [h, h],
            };
            make_made(&spec, seed).expect("valid made spec")
        }
        Family::Independent | Family::Skip | Family::Markov => {
            let kind = match family {
                Family::Independent => ChainKind::Independent,
                Family::Skip => ChainKind::Skip,
                _ => ChainKind::Markov,
            };
            make_synthetic(&SyntheticChainSpec { kind, t_len: t }, seed).expect("valid chain spec")
        }
    }
}

/// Seeded input from the system's legal domain: open `(0, 1)` components,
/// valid both for noise-driven samplers and unconstrained systems.
pub fn sample_input(system: &RecurrenceSystem, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1215);
    (0..system.input_dim())
        .map(|_| rng.gen_range(f64::EPSILON..1.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{check_triangularity, feedforward_evaluate};

    #[test]
    fn every_family_builds_and_evaluates() {
        for (i, family) in ALL_FAMILIES.iter().enumerate() {
            for t in [1, 2, 5] {
                let sys = sample_system(*family, t, 100 + i as u64);
                let input = sample_input(&sys, 7);
                feedforward_evaluate(&sys, &input).unwrap();
                let report = check_triangularity(&sys, 3, 1).unwrap();
                assert!(report.is_clean(), "{family:?} t={t}: {report:?}");
            }
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = sample_system(Family::Linear, 6, 5);
        let b = sample_system(Family::Linear, 6, 5);
        let u = sample_input(&a, 3);
        assert_eq!(u, sample_input(&b, 3));
        let x = feedforward_evaluate(&a, &u).unwrap();
        let y = feedforward_evaluate(&b, &u).unwrap();
        assert!(x.bitwise_eq(&y));
    }
}
