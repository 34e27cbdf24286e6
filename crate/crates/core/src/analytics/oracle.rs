//! Exact small-instance oracle: full enumeration of shard occupancy vectors
//! with rational arithmetic. Independent of the log-domain engine and the
//! samplers; used to validate both.

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::{Attack, SelectionDistribution};
use crate::exactmath::{binom, ExactRational};
use crate::protocol::{validate_params, ProtocolError, ProtocolParams};

/// Largest N* the enumeration accepts.
pub const MAX_ENUM_N_STAR: u64 = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("instance too large for exact enumeration: N* = {n_star} > {max}")]
    InstanceTooLarge { n_star: u64, max: u64 },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

fn big_binom(n: u64, k: i64) -> BigInt {
    binom(n, k).into()
}

/// Exact probability that some shard receives at least `threshold` Sybil IDs
/// when `n_sybil` of the N* selected IDs are adversarial, by enumerating
/// occupancy vectors weighted with their multivariate hypergeometric mass.
pub fn exact_threshold_probability(
    params: &ProtocolParams,
    n_sybil: u64,
    threshold: u64,
) -> Result<ExactRational, OracleError> {
    let n_star = params.n_star();
    if n_star > MAX_ENUM_N_STAR {
        return Err(OracleError::InstanceTooLarge {
            n_star,
            max: MAX_ENUM_N_STAR,
        });
    }
    assert!(n_sybil <= n_star);
    assert!(threshold >= 1);
    let mut total = ExactRational::zero();
    let one = ExactRational::from_integer(1.into());
    occupancy_walk(
        params.num_shards(),
        params.capacity,
        n_star,
        n_sybil,
        threshold,
        &one,
        &mut total,
    );
    Ok(total)
}

/// Recursive walk over shard occupancies. A branch where some shard already
/// crossed the threshold contributes its whole remaining mass at once.
fn occupancy_walk(
    shards_left: u64,
    capacity: u64,
    remaining_total: u64,
    remaining_sybil: u64,
    threshold: u64,
    mass: &ExactRational,
    total: &mut ExactRational,
) {
    if remaining_sybil < threshold || shards_left == 0 {
        return;
    }
    let remaining_honest = remaining_total - remaining_sybil;
    let a_min = capacity.saturating_sub(remaining_honest);
    let a_max = capacity.min(remaining_sybil);
    let denom = big_binom(remaining_total, capacity as i64);
    for a in a_min..=a_max {
        let ways = big_binom(remaining_sybil, a as i64)
            * big_binom(remaining_honest, (capacity - a) as i64);
        let branch = mass * ExactRational::new(ways, denom.clone());
        if a >= threshold {
            *total += branch;
        } else {
            occupancy_walk(
                shards_left - 1,
                capacity,
                remaining_total - capacity,
                remaining_sybil - a,
                threshold,
                &branch,
                total,
            );
        }
    }
}

/// Exact attack success probability by summing the exact selection pmf
/// against the exact occupancy enumeration.
pub fn exact_attack_probability(
    params: &ProtocolParams,
    attack: Attack,
    m_sybil: u64,
) -> Result<ExactRational, OracleError> {
    validate_params(params, m_sybil)?;
    let n_star = params.n_star();
    if n_star > MAX_ENUM_N_STAR {
        return Err(OracleError::InstanceTooLarge {
            n_star,
            max: MAX_ENUM_N_STAR,
        });
    }
    let threshold = attack.shard_threshold(params);
    let dist = SelectionDistribution::new(m_sybil, params.nodes, n_star)?;
    let mut total = ExactRational::zero();
    for n in dist.support() {
        if n < threshold {
            continue;
        }
        total += dist.exact_pmf(n) * exact_threshold_probability(params, n, threshold)?;
    }
    Ok(total)
}

/// Exact (P_BCP, P_GFT) pair for one epoch; the small-instance oracle shared
/// by the analytics engine and the simulator tests.
pub fn exact_epoch_distribution(
    params: &ProtocolParams,
    m_sybil: u64,
) -> Result<(ExactRational, ExactRational), OracleError> {
    Ok((
        exact_attack_probability(params, Attack::Bcp, m_sybil)?,
        exact_attack_probability(params, Attack::Gft, m_sybil)?,
    ))
}

/// f64 view of an exact rational, for tolerance comparisons.
pub fn rational_to_f64(value: &ExactRational) -> f64 {
    // Split into integer and fractional parts to stay in range.
    let trunc = value.trunc();
    let fract = value.fract();
    let trunc_f64 = i128::try_from(trunc.to_integer()).map(|v| v as f64).unwrap_or(f64::MAX);
    let num = i128::try_from(fract.numer().clone()).map(|v| v as f64).unwrap_or(0.0);
    let den = i128::try_from(fract.denom().clone()).map(|v| v as f64).unwrap_or(1.0);
    trunc_f64 + num / den
}
