//! Minimal row-major dense matrix used by the zoo constructors.
//!
//! Accumulation order is part of the contract: `matvec_acc` adds the
//! products of row `r` in ascending column order into a single running
//! sum that starts from the accumulator entry. Oracle tests reproduce
//! results to the last bit by following the same order.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        debug_assert!(rows.iter().all(|row| row.len() == c));
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Entries drawn uniformly from `[-scale, scale]`.
    pub fn seeded(rows: usize, cols: usize, scale: f64, rng: &mut ChaCha8Rng) -> Self {
        let data = (0..rows * cols)
            .map(|_| rng.gen_range(-scale..=scale))
            .collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    /// `acc[r] += sum_c m[r, c] * x[c]`, columns ascending.
    pub fn matvec_acc(&self, x: &[f64], acc: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(acc.len(), self.rows);
        for (row, out) in self.data.chunks_exact(self.cols).zip(acc.iter_mut()) {
            let mut s = *out;
            for (m, v) in row.iter().zip(x) {
                s += m * v;
            }
            *out = s;
        }
    }
}

/// Seeded vector with entries uniform in `[-scale, scale]`.
pub fn seeded_vec(len: usize, scale: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-scale..=scale)).collect()
}
