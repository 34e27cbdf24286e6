//! Random selection and shard-partition sampling primitives.
//!
//! A uniform random partition of N* IDs into 2^s shards of exactly c is
//! sampled shard by shard: conditioned on the remaining pool, the Sybil count
//! of the next shard is hypergeometric. The joint law is the multivariate
//! hypergeometric occupancy of the uniform exact-capacity partition.

use rand::Rng;
use rand_distr::{Distribution, Hypergeometric};

use crate::protocol::ProtocolParams;

/// Number of Sybil IDs among the N* selected from a pool of `m_sybil`
/// adversary IDs plus `nodes − 1` honest IDs (uniform, without replacement).
pub fn sample_selected_sybil<R: Rng + ?Sized>(
    params: &ProtocolParams,
    m_sybil: u64,
    rng: &mut R,
) -> u64 {
    let pool = params.pool_size(m_sybil);
    let n_star = params.n_star();
    sample_hypergeometric(pool, m_sybil, n_star, rng)
}

/// Per-shard Sybil counts for `n_sybil` Sybil IDs among the N* being
/// partitioned into 2^s shards of exactly `capacity` each.
pub fn sample_shard_sybil_counts<R: Rng + ?Sized>(
    params: &ProtocolParams,
    n_sybil: u64,
    rng: &mut R,
) -> Vec<u64> {
    let shards = params.num_shards() as usize;
    let capacity = params.capacity;
    let mut remaining_total = params.n_star();
    let mut remaining_sybil = n_sybil;
    debug_assert!(n_sybil <= remaining_total);
    let mut counts = Vec::with_capacity(shards);
    for _ in 0..shards - 1 {
        let a = sample_hypergeometric(remaining_total, remaining_sybil, capacity, rng);
        counts.push(a);
        remaining_total -= capacity;
        remaining_sybil -= a;
    }
    // Last shard takes the remainder.
    counts.push(remaining_sybil);
    counts
}

/// Sample one partition and report whether any shard collects at least
/// `threshold` Sybil IDs. Stops early once the outcome is decided.
pub fn any_shard_reaches<R: Rng + ?Sized>(
    params: &ProtocolParams,
    n_sybil: u64,
    threshold: u64,
    rng: &mut R,
) -> bool {
    debug_assert!(threshold >= 1);
    let shards = params.num_shards();
    let capacity = params.capacity;
    let mut remaining_total = params.n_star();
    let mut remaining_sybil = n_sybil;
    for i in 0..shards {
        if remaining_sybil < threshold {
            return false;
        }
        let a = if i == shards - 1 {
            remaining_sybil
        } else {
            sample_hypergeometric(remaining_total, remaining_sybil, capacity, rng)
        };
        if a >= threshold {
            return true;
        }
        remaining_total -= capacity;
        remaining_sybil -= a;
    }
    false
}

/// One hypergeometric draw with the degenerate cases short-circuited.
fn sample_hypergeometric<R: Rng + ?Sized>(
    total: u64,
    successes: u64,
    draws: u64,
    rng: &mut R,
) -> u64 {
    debug_assert!(successes <= total && draws <= total);
    if successes == 0 || draws == 0 {
        return 0;
    }
    if successes == total {
        return draws;
    }
    if draws == total {
        return successes;
    }
    Hypergeometric::new(total, successes, draws)
        .expect("checked parameters")
        .sample(rng)
}
