//! Outer K-fold partitions.

use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// Fold id of every row.
    pub assignment: Vec<usize>,
    pub seed: u64,
}

/// Seeded shuffle followed by contiguous chunking; the first `m % k` folds
/// get one extra row.
pub fn make_folds(m: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidParameter(alloc::format!("need at least two folds, got {k}")));
    }
    if m < k {
        return Err(Error::TooFewRows { needed: k, found: m });
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = alloc::vec![0; m];
    let (base, extra) = (m / k, m % k);
    let mut at = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &row in &order[at..at + size] {
            assignment[row] = fold;
        }
        at += size;
    }
    Ok(FoldPlan { k, assignment, seed })
}

impl FoldPlan {
    pub fn n_rows(&self) -> usize {
        self.assignment.len()
    }

    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.n_rows()).filter(|&r| self.assignment[r] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.n_rows()).filter(|&r| self.assignment[r] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}
