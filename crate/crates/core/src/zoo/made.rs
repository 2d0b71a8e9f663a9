//! Masked autoregressive sampler over scalar positions.
//!
//! A two-hidden-layer network with sequential connectivity masks maps a
//! right-padded copy of the current states to per-position location and
//! scale heads `(mu_t, sigma_t)`; the masks guarantee position `t` reads
//! only positions strictly below `t`. Sampling step `t` then applies the
//! logistic quantile `sigma_t * log(u_t / (1 - u_t)) + mu_t` to the `t`-th
//! component of the noise input. Evaluating one step costs a full network
//! pass, so a Jacobi sweep costs the same as one sequential step.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::system::RecurrenceSystem;

use super::mat::seeded_vec;

/// Lower bound applied to the scale head after exponentiation.
pub const SIGMA_FLOOR: f64 = 1e-3;
/// Upper bound applied to the scale head after exponentiation.
pub const SIGMA_CEIL: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MadeSpec {
    /// Sequence length; every state is a scalar.
    pub t_len: usize,
    /// Widths of the two hidden layers. For `t_len >= 2` each must be at
    /// least `t_len - 1` so every connectivity degree is represented.
    pub hidden: [usize; 2],
}

/// Row-major matrix whose masked-out entries are never read, so
/// perturbations of masked inputs cannot reach the output even through
/// floating-point signed-zero effects.
#[derive(Debug, Clone)]
struct MaskedMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    mask: Vec<bool>,
}

impl MaskedMat {
    fn seeded(
        rows: usize,
        cols: usize,
        scale: f64,
        allowed: impl Fn(usize, usize) -> bool,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let data = (0..rows * cols)
            .map(|_| rng.gen_range(-scale..=scale))
            .collect();
        let mask = (0..rows * cols)
            .map(|i| allowed(i / cols, i % cols))
            .collect();
        Self {
            rows,
            cols,
            data,
            mask,
        }
    }

    fn matvec_acc(&self, x: &[f64], acc: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(acc.len(), self.rows);
        let rows = self.data.chunks_exact(self.cols);
        let masks = self.mask.chunks_exact(self.cols);
        for ((row, mask_row), out) in rows.zip(masks).zip(acc.iter_mut()) {
            let mut s = *out;
            for ((m, &allowed), v) in row.iter().zip(mask_row).zip(x) {
                if allowed {
                    s += m * v;
                }
            }
            *out = s;
        }
    }
}

#[derive(Debug, Clone)]
pub struct Made {
    t_len: usize,
    w1: MaskedMat,
    b1: Vec<f64>,
    w2: MaskedMat,
    b2: Vec<f64>,
    w_mu: MaskedMat,
    b_mu: Vec<f64>,
    w_sigma: MaskedMat,
    b_sigma: Vec<f64>,
}

impl Made {
    pub fn generate(spec: &MadeSpec, seed: u64) -> Result<Self> {
        let t = spec.t_len;
        if t == 0 {
            return Err(Error::Model {
                reason: "sequence length must be at least 1".into(),
            });
        }
        let [h1, h2] = spec.hidden;
        if h1 == 0 || h2 == 0 {
            return Err(Error::Model {
                reason: "hidden widths must be positive".into(),
            });
        }
        if t >= 2 && (h1 < t - 1 || h2 < t - 1) {
            return Err(Error::Model {
                reason: format!(
                    "hidden widths {h1}, {h2} too small for t = {t}; each needs at least {}",
                    t - 1
                ),
            });
        }

        // connectivity degrees: inputs are 1..t, hidden units cycle 1..t-1
        let deg_in: Vec<usize> = (1..=t).collect();
        let hidden_degree = |k: usize| if t == 1 { 1 } else { 1 + (k % (t - 1)) };
        let d1: Vec<usize> = (0..h1).map(hidden_degree).collect();
        let d2: Vec<usize> = (0..h2).map(hidden_degree).collect();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w1 = MaskedMat::seeded(
            h1,
            t,
            1.0 / (t as f64).sqrt(),
            |r, c| d1[r] >= deg_in[c],
            &mut rng,
        );
        let b1 = seeded_vec(h1, 0.5, &mut rng);
        let w2 = MaskedMat::seeded(
            h2,
            h1,
            1.0 / (h1 as f64).sqrt(),
            |r, c| d2[r] >= d1[c],
            &mut rng,
        );
        let b2 = seeded_vec(h2, 0.5, &mut rng);
        let head_scale = 1.0 / (h2 as f64).sqrt();
        let w_mu = MaskedMat::seeded(t, h2, head_scale, |r, c| r + 1 > d2[c], &mut rng);
        let b_mu = seeded_vec(t, 0.5, &mut rng);
        let w_sigma = MaskedMat::seeded(t, h2, head_scale, |r, c| r + 1 > d2[c], &mut rng);
        let b_sigma = seeded_vec(t, 0.5, &mut rng);

        Ok(Self {
            t_len: t,
            w1,
            b1,
            w2,
            b2,
            w_mu,
            b_mu,
            w_sigma,
            b_sigma,
        })
    }

    pub fn t_len(&self) -> usize {
        self.t_len
    }

    /// Full network pass over a padded length-`T` input: returns the
    /// location and (positive, clamped) scale for every position.
    pub fn mu_sigma(&self, padded: &[f64]) -> (Vec<f64>, Vec<f64>) {
        debug_assert_eq!(padded.len(), self.t_len);
        let mut h1 = self.b1.clone();
        self.w1.matvec_acc(padded, &mut h1);
        for v in &mut h1 {
            *v = v.tanh();
        }
        let mut h2 = self.b2.clone();
        self.w2.matvec_acc(&h1, &mut h2);
        for v in &mut h2 {
            *v = v.tanh();
        }
        let mut mu = self.b_mu.clone();
        self.w_mu.matvec_acc(&h2, &mut mu);
        let mut sigma = self.b_sigma.clone();
        self.w_sigma.matvec_acc(&h2, &mut sigma);
        for v in &mut sigma {
            *v = v.exp().clamp(SIGMA_FLOOR, SIGMA_CEIL);
        }
        (mu, sigma)
    }

    /// The ancestral-sampling recurrence: step `t` right-pads the known
    /// states with zeros, runs the network, and draws its sample from the
    /// `t`-th heads and noise component.
    pub fn system(&self) -> RecurrenceSystem {
        let data = Arc::new(self.clone());
        let t_len = self.t_len;
        let mask = (1..=t_len).map(|t| (0..t).collect()).collect();
        let eval = {
            let data = Arc::clone(&data);
            move |t: usize, u: &[f64], s: &[Vec<f64>]| {
                let mut padded = vec![0.0; data.t_len];
                for (i, prev) in s[..t - 1].iter().enumerate() {
                    padded[i] = prev[0];
                }
                let (mu, sigma) = data.mu_sigma(&padded);
                let noise = u[t - 1];
                vec![sigma[t - 1] * (noise / (1.0 - noise)).ln() + mu[t - 1]]
            }
        };
        RecurrenceSystem::new(t_len, vec![1; t_len], mask, Arc::new(eval))
            .expect("made shapes are consistent")
    }
}

pub fn make_made(spec: &MadeSpec, seed: u64) -> Result<RecurrenceSystem> {
    Ok(Made::generate(spec, seed)?.system())
}

/// Logistic quantile: `sigma * log(u / (1 - u)) + mu`, strictly increasing
/// in `u` on `(0, 1)`.
pub fn made_inverse_cdf_step(mu: f64, sigma: f64, u: f64) -> Result<f64> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidArgument {
            reason: format!("sigma must be finite and positive, got {sigma}"),
        });
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidArgument {
            reason: format!("u must lie strictly inside (0, 1), got {u}"),
        });
    }
    Ok(sigma * (u / (1.0 - u)).ln() + mu)
}
