//! Seeded row subsampling shared by the ensemble selectors.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for elementary model `index` of an ensemble seeded with `seed`.
/// Each model gets its own ChaCha stream, so models can be drawn in any order.
pub fn model_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Number of rows drawn for each elementary model: `ceil(ratio * m)`, at least one.
pub fn subsample_size(m: usize, ratio: f64) -> usize {
    ((ratio * m as f64 - 1e-9).ceil() as usize).clamp(1, m)
}

/// Sorted row indices drawn without replacement for elementary model `index`.
pub fn subsample(m: usize, ratio: f64, seed: u64, index: usize) -> Vec<usize> {
    let mut rng = model_rng(seed, index);
    let mut rows = rand::seq::index::sample(&mut rng, m, subsample_size(m, ratio)).into_vec();
    rows.sort_unstable();
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(subsample_size(8, 0.75), 6);
        assert_eq!(subsample_size(38, 0.75), 29);
        assert_eq!(subsample_size(4, 0.75), 3);
        assert_eq!(subsample_size(10, 1.0), 10);
    }

    #[test]
    fn deterministic_and_distinct_streams() {
        let a = subsample(50, 0.75, 42, 3);
        assert_eq!(a, subsample(50, 0.75, 42, 3));
        assert_ne!(a, subsample(50, 0.75, 42, 4));
        assert_eq!(a.len(), 38);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
    }
}
