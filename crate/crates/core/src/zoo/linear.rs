//! Linear triangular systems: the oracle-friendly instance where
//! `h_t(u, s) = sum_j A_{t,j} s_j + C_t u + d_t` over a declared sparsity
//! mask of coefficient blocks.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::system::RecurrenceSystem;

use super::mat::{seeded_vec, Mat};

/// Which coefficient blocks `A_{t,j}` (j < t) are present.
#[derive(Debug, Clone, PartialEq)]
pub enum SparsityMask {
    /// No `A` blocks at all; every state reads only `u`.
    None,
    /// Every block below the diagonal.
    Full,
    /// `A_{t,j}` present iff `t - j <= bandwidth`.
    Band(usize),
    /// Each block present independently with the given probability,
    /// decided by the construction seed.
    Random { density: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearTriangularSpec {
    pub state_dims: Vec<usize>,
    pub input_dim: usize,
    pub mask: SparsityMask,
    /// Multiplies every generated coefficient; useful for conditioning
    /// experiments (large values overflow on purpose).
    pub weight_scale: f64,
}

impl LinearTriangularSpec {
    pub fn uniform(t_len: usize, state_dim: usize, input_dim: usize, mask: SparsityMask) -> Self {
        Self {
            state_dims: vec![state_dim; t_len],
            input_dim,
            mask,
            weight_scale: 1.0,
        }
    }
}

/// Generated coefficients, kept around so tests can run an independent
/// dense-substitution oracle over the same data.
#[derive(Debug, Clone)]
pub struct LinearTriangular {
    state_dims: Vec<usize>,
    input_dim: usize,
    /// `coeffs[t-1][j-1]` is `A_{t,j}` when the mask selects it.
    coeffs: Vec<Vec<Option<Mat>>>,
    input_coeffs: Vec<Mat>,
    biases: Vec<Vec<f64>>,
}

impl LinearTriangular {
    pub fn generate(spec: &LinearTriangularSpec, seed: u64) -> Result<Self> {
        let t_len = spec.state_dims.len();
        if t_len == 0 {
            return Err(Error::Model {
                reason: "linear system needs at least one state".into(),
            });
        }
        if spec.input_dim == 0 || spec.state_dims.contains(&0) {
            return Err(Error::Model {
                reason: "state and input dimensions must be positive".into(),
            });
        }
        if let SparsityMask::Random { density } = spec.mask {
            if !(0.0..=1.0).contains(&density) {
                return Err(Error::Model {
                    reason: format!("density must lie in [0, 1], got {density}"),
                });
            }
        }
        if !spec.weight_scale.is_finite() || spec.weight_scale <= 0.0 {
            return Err(Error::Model {
                reason: format!("weight scale must be finite and positive, got {}", spec.weight_scale),
            });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs = Vec::with_capacity(t_len);
        let mut input_coeffs = Vec::with_capacity(t_len);
        let mut biases = Vec::with_capacity(t_len);

        for t in 1..=t_len {
            let present: Vec<bool> = (1..t)
                .map(|j| match spec.mask {
                    SparsityMask::None => false,
                    SparsityMask::Full => true,
                    SparsityMask::Band(w) => t - j <= w,
                    SparsityMask::Random { density } => rng.gen_range(0.0..1.0) < density,
                })
                .collect();
            let fan_in: usize = spec.input_dim
                + present
                    .iter()
                    .zip(1..t)
                    .filter(|(p, _)| **p)
                    .map(|(_, j)| spec.state_dims[j - 1])
                    .sum::<usize>();
            let scale = spec.weight_scale / (fan_in as f64).sqrt();
            let dim = spec.state_dims[t - 1];

            let row: Vec<Option<Mat>> = present
                .iter()
                .zip(1..t)
                .map(|(&p, j)| {
                    p.then(|| Mat::seeded(dim, spec.state_dims[j - 1], scale, &mut rng))
                })
                .collect();
            coeffs.push(row);
            input_coeffs.push(Mat::seeded(dim, spec.input_dim, scale, &mut rng));
            biases.push(seeded_vec(dim, 1.0, &mut rng));
        }

        Ok(Self {
            state_dims: spec.state_dims.clone(),
            input_dim: spec.input_dim,
            coeffs,
            input_coeffs,
            biases,
        })
    }

    pub fn coeff(&self, t: usize, j: usize) -> Option<&Mat> {
        self.coeffs[t - 1][j - 1].as_ref()
    }

    pub fn input_coeff(&self, t: usize) -> &Mat {
        &self.input_coeffs[t - 1]
    }

    pub fn bias(&self, t: usize) -> &[f64] {
        &self.biases[t - 1]
    }

    pub fn state_dims(&self) -> &[usize] {
        &self.state_dims
    }

    /// Evaluation order: bias, then the input block, then the `A` blocks
    /// in ascending `j`.
    pub fn system(&self) -> RecurrenceSystem {
        let data = Arc::new(self.clone());
        let mask = (1..=self.state_dims.len())
            .map(|t| {
                let mut m = vec![0];
                m.extend((1..t).filter(|&j| self.coeffs[t - 1][j - 1].is_some()));
                m
            })
            .collect();
        let eval = {
            let data = Arc::clone(&data);
            move |t: usize, u: &[f64], s: &[Vec<f64>]| {
                let mut acc = data.biases[t - 1].clone();
                data.input_coeffs[t - 1].matvec_acc(u, &mut acc);
                for (j, block) in data.coeffs[t - 1].iter().enumerate() {
                    if let Some(a) = block {
                        a.matvec_acc(&s[j], &mut acc);
                    }
                }
                acc
            }
        };
        RecurrenceSystem::new(self.input_dim, self.state_dims.clone(), mask, Arc::new(eval))
            .expect("generated coefficients are consistent")
    }
}

/// Builds the recurrence system directly; use [`LinearTriangular::generate`]
/// when the coefficients themselves are needed.
pub fn make_linear_triangular(spec: &LinearTriangularSpec, seed: u64) -> Result<RecurrenceSystem> {
    Ok(LinearTriangular::generate(spec, seed)?.system())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::{build_dependency_graph, dependency_depth};
    use crate::system::feedforward_evaluate;

    #[test]
    fn diagonal_only_mask_gives_depth_one() {
        let spec = LinearTriangularSpec::uniform(6, 2, 2, SparsityMask::None);
        let sys = make_linear_triangular(&spec, 3).unwrap();
        assert_eq!(dependency_depth(&build_dependency_graph(&sys)), 1);
    }

    #[test]
    fn full_mask_gives_depth_t() {
        let spec = LinearTriangularSpec::uniform(6, 2, 2, SparsityMask::Full);
        let sys = make_linear_triangular(&spec, 3).unwrap();
        assert_eq!(dependency_depth(&build_dependency_graph(&sys)), 6);
    }

    /// Dense forward substitution written independently of the evaluator
    /// closure, following the documented accumulation order.
    fn substitution_oracle(model: &LinearTriangular, input: &[f64]) -> Vec<Vec<f64>> {
        let t_len = model.state_dims().len();
        let mut states: Vec<Vec<f64>> = Vec::with_capacity(t_len);
        for t in 1..=t_len {
            let dim = model.state_dims()[t - 1];
            let mut out = Vec::with_capacity(dim);
            for r in 0..dim {
                let mut s = model.bias(t)[r];
                for (c, uv) in input.iter().enumerate() {
                    s += model.input_coeff(t).get(r, c) * uv;
                }
                for j in 1..t {
                    if let Some(a) = model.coeff(t, j) {
                        for (c, sv) in states[j - 1].iter().enumerate() {
                            s += a.get(r, c) * sv;
                        }
                    }
                }
                out.push(s);
            }
            states.push(out);
        }
        states
    }

    #[test]
    fn feedforward_matches_substitution_oracle_to_zero_ulps() {
        let spec = LinearTriangularSpec::uniform(8, 3, 2, SparsityMask::Random { density: 0.6 });
        let model = LinearTriangular::generate(&spec, 42).unwrap();
        let sys = model.system();
        let input = [0.3, -0.8];
        let got = feedforward_evaluate(&sys, &input).unwrap();
        let want = substitution_oracle(&model, &input);
        for (a, b) in got.states.iter().zip(&want) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn residual_matches_matrix_form_oracle() {
        // residual entry t must equal (A s + C u + d) - s_t computed densely
        let spec = LinearTriangularSpec::uniform(5, 2, 2, SparsityMask::Full);
        let model = LinearTriangular::generate(&spec, 9).unwrap();
        let sys = model.system();
        let input = [1.1, -0.4];

        let mut rng_states: Vec<Vec<f64>> = Vec::new();
        for (i, &d) in model.state_dims().iter().enumerate() {
            rng_states.push((0..d).map(|k| ((i + 1) * (k + 2)) as f64 * 0.1).collect());
        }
        let candidate = crate::system::StateSequence::new(rng_states.clone(), 0);
        let got = crate::system::residual(&sys, &input, &candidate).unwrap();

        for t in 1..=5 {
            let dim = model.state_dims()[t - 1];
            for r in 0..dim {
                let mut s = model.bias(t)[r];
                for (c, uv) in input.iter().enumerate() {
                    s += model.input_coeff(t).get(r, c) * uv;
                }
                for j in 1..t {
                    if let Some(a) = model.coeff(t, j) {
                        for (c, sv) in rng_states[j - 1].iter().enumerate() {
                            s += a.get(r, c) * sv;
                        }
                    }
                }
                let want = s - rng_states[t - 1][r];
                assert_eq!(got[t - 1][r].to_bits(), want.to_bits());
            }
        }
    }

    #[test]
    fn rejects_inconsistent_specs() {
        let mut spec = LinearTriangularSpec::uniform(3, 2, 2, SparsityMask::Full);
        spec.state_dims[1] = 0;
        assert!(make_linear_triangular(&spec, 0).is_err());
        let bad = LinearTriangularSpec::uniform(3, 2, 2, SparsityMask::Random { density: 1.5 });
        assert!(make_linear_triangular(&bad, 0).is_err());
    }
}
