//! Structural parameters of the shard-based protocol and their mutual
//! consistency checks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("network must have at least 1 node (got {0})")]
    TooFewNodes(u64),
    #[error("shard capacity must be at least 1")]
    ZeroCapacity,
    #[error("shard shape too large: 2^{shard_exp} shards of capacity {capacity} overflows")]
    ShapeTooLarge { shard_exp: u32, capacity: u64 },
    #[error(
        "consensus threshold {tau} out of range for capacity {capacity}: require capacity/2 < tau <= capacity"
    )]
    ThresholdOutOfRange { tau: u64, capacity: u64 },
    #[error("threshold fraction {0} out of range: require 0.5 < fraction <= 1.0")]
    FractionOutOfRange(f64),
    #[error("ID pool too small: {available} IDs available, {required} required per epoch")]
    PoolTooSmall { available: u64, required: u64 },
}

/// Consensus threshold given either as a fraction of the shard capacity or
/// directly as an ID count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConsensusThresholdSpec {
    Fraction(f64),
    Count(u64),
}

/// Integer conversion rule for fractional thresholds. The two rules agree
/// wherever fraction·capacity is not an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ThresholdRule {
    /// tau = ceil(fraction · capacity)
    #[default]
    Ceil,
    /// tau = floor(fraction · capacity) + 1
    FloorPlusOne,
}

/// Resolve a threshold spec to an ID count under the default (ceil) rule.
pub fn resolve_threshold(spec: ConsensusThresholdSpec, capacity: u64) -> Result<u64, ProtocolError> {
    resolve_threshold_with(spec, capacity, ThresholdRule::Ceil)
}

pub fn resolve_threshold_with(
    spec: ConsensusThresholdSpec,
    capacity: u64,
    rule: ThresholdRule,
) -> Result<u64, ProtocolError> {
    if capacity == 0 {
        return Err(ProtocolError::ZeroCapacity);
    }
    let tau = match spec {
        ConsensusThresholdSpec::Fraction(f) => {
            if !(f > 0.5 && f <= 1.0) {
                return Err(ProtocolError::FractionOutOfRange(f));
            }
            let x = f * capacity as f64;
            // Snap float noise (e.g. (2/3)·600 = 399.99999999999994) back to
            // the intended integer before applying the rule.
            let snapped = if (x - x.round()).abs() < 1e-7 { x.round() } else { x };
            match rule {
                ThresholdRule::Ceil => snapped.ceil() as u64,
                ThresholdRule::FloorPlusOne => snapped.floor() as u64 + 1,
            }
        }
        ConsensusThresholdSpec::Count(count) => count,
    };
    if 2 * tau <= capacity || tau > capacity {
        return Err(ProtocolError::ThresholdOutOfRange { tau, capacity });
    }
    Ok(tau)
}

/// Structural parameters of one epoch: `nodes` participants, `2^shard_exp`
/// shards of exactly `capacity` IDs each, intra-shard consensus at `threshold`
/// agreeing IDs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Total nodes in the network (N).
    pub nodes: u64,
    /// Number of shards is 2^shard_exp.
    pub shard_exp: u32,
    /// IDs per shard.
    pub capacity: u64,
    /// Consensus threshold as an ID count, in (capacity/2, capacity].
    pub threshold: u64,
}

impl ProtocolParams {
    pub fn new(
        nodes: u64,
        shard_exp: u32,
        capacity: u64,
        threshold: u64,
    ) -> Result<Self, ProtocolError> {
        // nodes == 1 is the degenerate honest-pool-empty network; it is
        // allowed so the all-Sybil limit cases stay expressible.
        if nodes < 1 {
            return Err(ProtocolError::TooFewNodes(nodes));
        }
        if capacity == 0 {
            return Err(ProtocolError::ZeroCapacity);
        }
        if shard_exp >= 32 {
            return Err(ProtocolError::ShapeTooLarge { shard_exp, capacity });
        }
        if capacity.checked_mul(1u64 << shard_exp).is_none() {
            return Err(ProtocolError::ShapeTooLarge { shard_exp, capacity });
        }
        if 2 * threshold <= capacity || threshold > capacity {
            return Err(ProtocolError::ThresholdOutOfRange {
                tau: threshold,
                capacity,
            });
        }
        Ok(ProtocolParams {
            nodes,
            shard_exp,
            capacity,
            threshold,
        })
    }

    /// Build params resolving the threshold from a spec (default rule).
    pub fn with_threshold_spec(
        nodes: u64,
        shard_exp: u32,
        capacity: u64,
        spec: ConsensusThresholdSpec,
    ) -> Result<Self, ProtocolError> {
        let tau = resolve_threshold(spec, capacity)?;
        Self::new(nodes, shard_exp, capacity, tau)
    }

    pub fn num_shards(&self) -> u64 {
        1u64 << self.shard_exp
    }

    /// IDs consumed per epoch: N* = 2^s · c.
    pub fn n_star(&self) -> u64 {
        self.num_shards() * self.capacity
    }

    /// Sybil IDs in one shard needed to veto its consensus: c − τ + 1.
    pub fn bcp_shard_threshold(&self) -> u64 {
        self.capacity - self.threshold + 1
    }

    /// Sybil IDs in one shard needed to dictate its output: τ.
    pub fn gft_shard_threshold(&self) -> u64 {
        self.threshold
    }

    /// Size of the epoch ID pool when the adversary holds `m_sybil` IDs:
    /// M + N − 1 (each honest node contributes exactly one ID).
    pub fn pool_size(&self, m_sybil: u64) -> u64 {
        m_sybil + self.nodes - 1
    }
}

/// Check every structural invariant plus the pool condition
/// M + N − 1 ≥ N*. Side-effect free and idempotent.
pub fn validate_params(params: &ProtocolParams, m_sybil: u64) -> Result<(), ProtocolError> {
    ProtocolParams::new(
        params.nodes,
        params.shard_exp,
        params.capacity,
        params.threshold,
    )?;
    let available = params.pool_size(m_sybil);
    let required = params.n_star();
    if available < required {
        return Err(ProtocolError::PoolTooSmall {
            available,
            required,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn resolve_fraction_examples() {
        assert_eq!(
            resolve_threshold(ConsensusThresholdSpec::Fraction(2.0 / 3.0), 3).unwrap(),
            2
        );
        assert_eq!(
            resolve_threshold(ConsensusThresholdSpec::Fraction(2.0 / 3.0), 100).unwrap(),
            67
        );
        assert_eq!(
            resolve_threshold(ConsensusThresholdSpec::Fraction(2.0 / 3.0), 600).unwrap(),
            400
        );
    }

    #[test]
    fn resolve_count_passthrough() {
        assert_eq!(resolve_threshold(ConsensusThresholdSpec::Count(2), 2).unwrap(), 2);
    }

    #[test]
    fn resolve_rules_differ_where_product_is_integer() {
        // 2/3 · 3 = 2 exactly: ceil gives 2, floor+1 gives 3.
        let spec = ConsensusThresholdSpec::Fraction(2.0 / 3.0);
        assert_eq!(resolve_threshold_with(spec, 3, ThresholdRule::Ceil).unwrap(), 2);
        assert_eq!(
            resolve_threshold_with(spec, 3, ThresholdRule::FloorPlusOne).unwrap(),
            3
        );
        // Non-integer product: both give 67.
        assert_eq!(
            resolve_threshold_with(spec, 100, ThresholdRule::FloorPlusOne).unwrap(),
            67
        );
    }

    #[test]
    fn resolve_rejects_out_of_range() {
        assert!(resolve_threshold(ConsensusThresholdSpec::Fraction(0.5), 10).is_err());
        assert!(resolve_threshold(ConsensusThresholdSpec::Fraction(1.01), 10).is_err());
        assert!(resolve_threshold(ConsensusThresholdSpec::Count(5), 10).is_err());
        assert!(resolve_threshold(ConsensusThresholdSpec::Count(11), 10).is_err());
        assert!(resolve_threshold(ConsensusThresholdSpec::Count(6), 10).is_ok());
    }

    #[test]
    fn validate_params_pool_boundary() {
        // N=14, s=2, c=3: pool 13 >= N* 12, accepted.
        let p = ProtocolParams::new(14, 2, 3, 2).unwrap();
        assert!(validate_params(&p, 0).is_ok());

        // N=10: pool 9 < N* 12.
        let p = ProtocolParams::new(10, 2, 3, 2).unwrap();
        assert_eq!(
            validate_params(&p, 0),
            Err(ProtocolError::PoolTooSmall {
                available: 9,
                required: 12
            })
        );
    }

    #[test]
    fn validate_params_paper_setup() {
        let p = ProtocolParams::new(200, 2, 50, 34).unwrap();
        assert!(validate_params(&p, 66).is_ok());
    }

    #[test]
    fn new_rejects_each_invariant_separately() {
        assert!(matches!(
            ProtocolParams::new(0, 2, 3, 2),
            Err(ProtocolError::TooFewNodes(0))
        ));
        assert!(matches!(
            ProtocolParams::new(14, 2, 0, 1),
            Err(ProtocolError::ZeroCapacity)
        ));
        assert!(matches!(
            ProtocolParams::new(14, 2, 4, 2),
            Err(ProtocolError::ThresholdOutOfRange { .. })
        ));
        assert!(matches!(
            ProtocolParams::new(14, 40, 4, 3),
            Err(ProtocolError::ShapeTooLarge { .. })
        ));
    }

    #[test]
    fn shard_thresholds() {
        let p = ProtocolParams::new(200, 2, 50, 34).unwrap();
        assert_eq!(p.n_star(), 200);
        assert_eq!(p.bcp_shard_threshold(), 17);
        assert_eq!(p.gft_shard_threshold(), 34);
    }

    proptest! {
        #[test]
        fn resolve_threshold_monotone_in_capacity(
            c1 in 1u64..5000,
            c2 in 1u64..5000,
            frac in 0.51f64..1.0,
        ) {
            prop_assume!(c1 <= c2);
            let spec = ConsensusThresholdSpec::Fraction(frac);
            let t1 = resolve_threshold(spec, c1);
            let t2 = resolve_threshold(spec, c2);
            if let (Ok(t1), Ok(t2)) = (t1, t2) {
                prop_assert!(t1 <= t2);
            }
        }

        #[test]
        fn validate_is_idempotent(n in 2u64..500, s in 0u32..4, c in 1u64..40, m in 0u64..500) {
            let tau = c / 2 + 1;
            if let Ok(p) = ProtocolParams::new(n, s, c, tau) {
                let first = validate_params(&p, m);
                let second = validate_params(&p, m);
                prop_assert_eq!(first, second);
            }
        }
    }
}
