//! Fixtures shared by the benchmarks.

use evcond::limit::{ReplicateStreams, DATA_DOMAIN};
use evcond::{compute_ranks, sample_cauchy, RankData};

/// Ranks of a reproducible Cauchy sample.
pub fn cauchy_ranks(n: usize, seed: u64) -> RankData {
    let mut rng = ReplicateStreams::new(seed, DATA_DOMAIN).stream(0);
    compute_ranks(&sample_cauchy(n, &mut rng).expect("n >= 1")).0
}
