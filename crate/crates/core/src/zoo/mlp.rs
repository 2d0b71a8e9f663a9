//! Layered multilayer-perceptron chains: one state per layer.
//!
//! Chain connectivity reads only the previous layer,
//! `h_t(u, s) = a^t(b^t + W^t s_{t-1})` with `s_0 = u`, giving a
//! Markov-structured graph of depth `T`. Dense connectivity feeds layer
//! `t` the concatenation of `u` and all earlier states, giving a full
//! lower-triangular graph.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::system::RecurrenceSystem;

use super::mat::{seeded_vec, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Tanh,
    Rectifier,
}

impl Activation {
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Identity => v,
            Activation::Tanh => v.tanh(),
            Activation::Rectifier => v.max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Chain,
    Dense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredMlpSpec {
    /// Width of each layer; the length is the number of states `T = L`.
    pub layer_widths: Vec<usize>,
    pub input_dim: usize,
    pub activation: Activation,
    pub connectivity: Connectivity,
    pub weight_scale: f64,
}

impl LayeredMlpSpec {
    pub fn uniform(
        t_len: usize,
        width: usize,
        input_dim: usize,
        activation: Activation,
        connectivity: Connectivity,
    ) -> Self {
        Self {
            layer_widths: vec![width; t_len],
            input_dim,
            activation,
            connectivity,
            weight_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LayeredMlp {
    widths: Vec<usize>,
    input_dim: usize,
    activation: Activation,
    connectivity: Connectivity,
    weights: Vec<Mat>,
    biases: Vec<Vec<f64>>,
}

impl LayeredMlp {
    pub fn generate(spec: &LayeredMlpSpec, seed: u64) -> Result<Self> {
        if spec.layer_widths.is_empty() {
            return Err(Error::Model {
                reason: "an mlp needs at least one layer".into(),
            });
        }
        if spec.input_dim == 0 || spec.layer_widths.contains(&0) {
            return Err(Error::Model {
                reason: "layer widths and input dimension must be positive".into(),
            });
        }
        if !spec.weight_scale.is_finite() || spec.weight_scale <= 0.0 {
            return Err(Error::Model {
                reason: format!("weight scale must be finite and positive, got {}", spec.weight_scale),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(spec.layer_widths.len());
        let mut biases = Vec::with_capacity(spec.layer_widths.len());
        for t in 1..=spec.layer_widths.len() {
            let fan_in = match spec.connectivity {
                Connectivity::Chain => {
                    if t == 1 {
                        spec.input_dim
                    } else {
                        spec.layer_widths[t - 2]
                    }
                }
                Connectivity::Dense => {
                    spec.input_dim + spec.layer_widths[..t - 1].iter().sum::<usize>()
                }
            };
            let scale = spec.weight_scale / (fan_in as f64).sqrt();
            weights.push(Mat::seeded(spec.layer_widths[t - 1], fan_in, scale, &mut rng));
            biases.push(seeded_vec(spec.layer_widths[t - 1], 0.5, &mut rng));
        }
        Ok(Self {
            widths: spec.layer_widths.clone(),
            input_dim: spec.input_dim,
            activation: spec.activation,
            connectivity: spec.connectivity,
            weights,
            biases,
        })
    }

    /// Explicit parameters, for hand-checked tests.
    pub fn from_parts(
        weights: Vec<Mat>,
        biases: Vec<Vec<f64>>,
        input_dim: usize,
        activation: Activation,
        connectivity: Connectivity,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::Model {
                reason: "weights and biases must be non-empty and aligned".into(),
            });
        }
        let widths: Vec<usize> = weights.iter().map(Mat::rows).collect();
        for t in 1..=weights.len() {
            let expected = match connectivity {
                Connectivity::Chain => {
                    if t == 1 {
                        input_dim
                    } else {
                        widths[t - 2]
                    }
                }
                Connectivity::Dense => input_dim + widths[..t - 1].iter().sum::<usize>(),
            };
            if weights[t - 1].cols() != expected || biases[t - 1].len() != widths[t - 1] {
                return Err(Error::Model {
                    reason: format!("layer {t} has inconsistent shapes"),
                });
            }
        }
        Ok(Self {
            widths,
            input_dim,
            activation,
            connectivity,
            weights,
            biases,
        })
    }

    pub fn system(&self) -> RecurrenceSystem {
        let data = Arc::new(self.clone());
        let t_len = self.widths.len();
        let mask = (1..=t_len)
            .map(|t| match self.connectivity {
                Connectivity::Chain => {
                    if t == 1 {
                        vec![0]
                    } else {
                        vec![t - 1]
                    }
                }
                Connectivity::Dense => (0..t).collect(),
            })
            .collect();
        let eval = {
            let data = Arc::clone(&data);
            move |t: usize, u: &[f64], s: &[Vec<f64>]| {
                let mut acc = data.biases[t - 1].clone();
                match data.connectivity {
                    Connectivity::Chain => {
                        let prev: &[f64] = if t == 1 { u } else { &s[t - 2] };
                        data.weights[t - 1].matvec_acc(prev, &mut acc);
                    }
                    Connectivity::Dense => {
                        let mut concat = Vec::with_capacity(data.weights[t - 1].cols());
                        concat.extend_from_slice(u);
                        for prev in &s[..t - 1] {
                            concat.extend_from_slice(prev);
                        }
                        data.weights[t - 1].matvec_acc(&concat, &mut acc);
                    }
                }
                for v in &mut acc {
                    *v = data.activation.apply(*v);
                }
                acc
            }
        };
        RecurrenceSystem::new(self.input_dim, self.widths.clone(), mask, Arc::new(eval))
            .expect("generated layers are consistent")
    }
}

pub fn make_layered_mlp(spec: &LayeredMlpSpec, seed: u64) -> Result<RecurrenceSystem> {
    Ok(LayeredMlp::generate(spec, seed)?.system())
}
