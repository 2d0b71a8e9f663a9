//! Ordered integer intervals partitioning `[1, T]`, used to group states
//! into blocks for the hybrid solvers.

use crate::error::{Error, Result};

/// Contiguous, disjoint, ascending intervals `[a_i, b_i]` (1-based,
/// inclusive) whose union is exactly `[1, T]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    blocks: Vec<(usize, usize)>,
}

impl BlockPartition {
    pub fn new(blocks: Vec<(usize, usize)>, t_len: usize) -> Result<Self> {
        if t_len == 0 {
            return Err(Error::Partition {
                reason: "t must be at least 1".into(),
            });
        }
        if blocks.is_empty() {
            return Err(Error::Partition {
                reason: "partition has no blocks".into(),
            });
        }
        let mut expected = 1usize;
        for &(a, b) in &blocks {
            if a > b {
                return Err(Error::Partition {
                    reason: format!("block [{a}, {b}] is empty"),
                });
            }
            if a > expected {
                return Err(Error::Partition {
                    reason: format!("uncovered index {expected}"),
                });
            }
            if a < expected {
                return Err(Error::Partition {
                    reason: format!("index {a} covered twice"),
                });
            }
            expected = b + 1;
        }
        if expected <= t_len {
            return Err(Error::Partition {
                reason: format!("uncovered index {expected} (t = {t_len})"),
            });
        }
        if expected > t_len + 1 {
            return Err(Error::Partition {
                reason: format!("block ends at {}, beyond t = {t_len}", expected - 1),
            });
        }
        Ok(Self { blocks })
    }

    /// One state per block; reduces Jacobi-GS to plain Jacobi and
    /// GS-Jacobi to feedforward computation.
    pub fn singletons(t_len: usize) -> Result<Self> {
        Self::new((1..=t_len).map(|t| (t, t)).collect(), t_len)
    }

    /// The whole range as a single block.
    pub fn single_block(t_len: usize) -> Result<Self> {
        Self::new(vec![(1, t_len)], t_len)
    }

    /// Blocks of `block_size` states; any remainder forms a final short
    /// block (e.g. size 10 over T = 25 gives 1-10, 11-20, 21-25).
    pub fn uniform(t_len: usize, block_size: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::Partition {
                reason: "block size must be at least 1".into(),
            });
        }
        if t_len == 0 {
            return Err(Error::Partition {
                reason: "t must be at least 1".into(),
            });
        }
        let mut blocks = Vec::new();
        let mut a = 1;
        while a <= t_len {
            let b = (a + block_size - 1).min(t_len);
            blocks.push((a, b));
            a = b + 1;
        }
        Self::new(blocks, t_len)
    }

    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    /// Number of blocks `M`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one block
    }

    pub fn block_len(&self, i: usize) -> usize {
        let (a, b) = self.blocks[i];
        b - a + 1
    }

    pub fn max_block_len(&self) -> usize {
        (0..self.len()).map(|i| self.block_len(i)).max().unwrap()
    }

    /// Total number of states covered.
    pub fn t_len(&self) -> usize {
        self.blocks.last().unwrap().1
    }

    /// Index of the block containing state `t` (1-based state index).
    pub fn block_of(&self, t: usize) -> Option<usize> {
        self.blocks.iter().position(|&(a, b)| a <= t && t <= b)
    }
}

impl std::fmt::Display for BlockPartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, (a, b)) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}-{b}")?;
        }
        Ok(())
    }
}
