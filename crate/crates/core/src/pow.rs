//! Proof-of-work identity generation model: puzzle difficulty, per-hash ID
//! probability, adversary Sybil-ID yield, and the strict Sybil-resistance
//! predicate, plus a concrete demonstration solver.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PowError {
    #[error("target exponents must satisfy 0 < target_exp <= max_target_exp <= digest_bits (got {target_exp}, {max_target_exp}, {digest_bits})")]
    BadExponents {
        digest_bits: u32,
        max_target_exp: u32,
        target_exp: u32,
    },
    #[error("initialization time must be positive (got {0})")]
    BadInitTime(f64),
    #[error("hash power must be non-negative (got {0})")]
    BadHashPower(f64),
    #[error("adversary hash fraction must lie in [0, 1) (got {0})")]
    BadHashFraction(f64),
}

/// PoW identity-generation parameters. A valid ID digest must be below
/// 2^target_exp out of a 2^digest_bits space; the first-epoch target
/// 2^max_target_exp defines difficulty 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowParams {
    /// Digest length in bits (L).
    pub digest_bits: u32,
    /// First-epoch target exponent: MaxTarget = 2^max_target_exp.
    pub max_target_exp: u32,
    /// Current-epoch target exponent.
    pub target_exp: u32,
    /// Initialization time in seconds (T_I).
    pub init_time: f64,
    /// Reference per-node hash power in hashes/second.
    pub hash_power: f64,
}

impl PowParams {
    pub fn new(
        digest_bits: u32,
        max_target_exp: u32,
        target_exp: u32,
        init_time: f64,
        hash_power: f64,
    ) -> Result<Self, PowError> {
        if target_exp == 0 || target_exp > max_target_exp || max_target_exp > digest_bits {
            return Err(PowError::BadExponents {
                digest_bits,
                max_target_exp,
                target_exp,
            });
        }
        if init_time.is_nan() || init_time <= 0.0 {
            return Err(PowError::BadInitTime(init_time));
        }
        if hash_power.is_nan() || hash_power < 0.0 {
            return Err(PowError::BadHashPower(hash_power));
        }
        Ok(PowParams {
            digest_bits,
            max_target_exp,
            target_exp,
            init_time,
            hash_power,
        })
    }
}

/// Puzzle difficulty: MaxTarget / current target = 2^(max_target_exp − target_exp).
pub fn difficulty(p: &PowParams) -> f64 {
    f64::exp2((p.max_target_exp - p.target_exp) as f64)
}

/// Per-hash probability of finding a valid ID: 2^target_exp / 2^digest_bits.
pub fn id_probability(p: &PowParams) -> f64 {
    f64::exp2(p.target_exp as f64 - p.digest_bits as f64)
}

/// The same probability routed through the difficulty form
/// MaxTarget / (difficulty · 2^digest_bits). Powers of two divide exactly in
/// binary floating point, so this equals `id_probability` bit for bit.
pub fn id_probability_via_difficulty(p: &PowParams) -> f64 {
    f64::exp2(p.max_target_exp as f64) / (difficulty(p) * f64::exp2(p.digest_bits as f64))
}

/// Expected and integral Sybil-ID yield of an adversary hashing at
/// `adv_hash_power` for the whole initialization window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SybilYield {
    pub expected: f64,
    pub count: u64,
}

/// Deterministic yield: expected = p · h · T_I, count = floor(expected).
pub fn sybil_yield(p: &PowParams, adv_hash_power: f64) -> SybilYield {
    let expected = id_probability(p) * adv_hash_power * p.init_time;
    SybilYield {
        expected,
        count: expected.floor() as u64,
    }
}

/// Stochastic yield: one Binomial(h · T_I, id_probability) draw.
pub fn sybil_yield_stochastic<R: Rng + ?Sized>(
    p: &PowParams,
    adv_hash_power: f64,
    rng: &mut R,
) -> u64 {
    let attempts = (adv_hash_power * p.init_time).floor();
    if attempts <= 0.0 {
        return 0;
    }
    let attempts = if attempts >= u64::MAX as f64 {
        u64::MAX
    } else {
        attempts as u64
    };
    Binomial::new(attempts, id_probability(p))
        .expect("id_probability is a valid probability")
        .sample(rng)
}

/// An ID-generation mechanism is strictly Sybil-resistant iff the adversary's
/// expected yield stays below 2 (it can never register a second ID).
pub fn is_strictly_sybil_resistant(p: &PowParams, adv_hash_power: f64) -> bool {
    sybil_yield(p, adv_hash_power).expected < 2.0
}

/// Adversary strength: either an explicit Sybil-ID count or a hash-power
/// figure to be mapped to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AdversaryModel {
    /// The adversary holds exactly this many Sybil IDs.
    ExplicitCount(u64),
    /// The adversary's hash power, interpreted via the mapping.
    HashPower { rho: f64, mapping: HashPowerMapping },
}

impl AdversaryModel {
    pub fn hash_fraction(rho: f64) -> Self {
        AdversaryModel::HashPower {
            rho,
            mapping: HashPowerMapping::FractionOfTotal,
        }
    }

    /// Sybil-ID count in a network of `nodes`.
    pub fn sybil_count(&self, nodes: u64) -> Result<u64, PowError> {
        match *self {
            AdversaryModel::ExplicitCount(m) => Ok(m),
            AdversaryModel::HashPower { rho, mapping } => m_for_mapping(mapping, rho, nodes),
        }
    }
}

/// How an adversary hash-power figure on a sweep axis maps to a Sybil count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum HashPowerMapping {
    /// Input is the adversary's fraction rho of total network hash power.
    /// Honest nodes yield one ID each, so M = round(rho/(1−rho) · (N−1)).
    #[default]
    FractionOfTotal,
    /// Input is the ratio of adversary power to the average per-node power;
    /// M = round(ratio).
    RatioToAverage,
}

/// Sybil-ID count for an adversary holding fraction `rho` of the network's
/// total hash power, under the one-ID-per-honest-node assumption.
pub fn m_from_hash_fraction(rho: f64, nodes: u64) -> Result<u64, PowError> {
    if !(0.0..1.0).contains(&rho) {
        return Err(PowError::BadHashFraction(rho));
    }
    Ok((rho / (1.0 - rho) * (nodes - 1) as f64).round() as u64)
}

/// Alternative mapping: the axis value is already the adversary-to-average
/// power ratio, which is its expected ID yield.
pub fn m_from_power_ratio(ratio: f64) -> Result<u64, PowError> {
    if ratio.is_nan() || ratio < 0.0 {
        return Err(PowError::BadHashFraction(ratio));
    }
    Ok(ratio.round() as u64)
}

pub fn m_for_mapping(mapping: HashPowerMapping, value: f64, nodes: u64) -> Result<u64, PowError> {
    match mapping {
        HashPowerMapping::FractionOfTotal => m_from_hash_fraction(value, nodes),
        HashPowerMapping::RatioToAverage => m_from_power_ratio(value),
    }
}

/// A found PoW solution: the first qualifying nonce and its digest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PowSolution {
    pub nonce: u64,
    pub digest: [u8; 32],
}

/// Demonstration solver: scan nonces from 0 upward until
/// SHA-256(epoch_randomness || identity_material || nonce_be8) interpreted as
/// a big-endian 256-bit integer falls below 2^target_exp. `None` when
/// `max_attempts` nonces are exhausted.
pub fn solve_pow_demo(
    epoch_randomness: &[u8],
    identity_material: &[u8],
    target_exp: u32,
    max_attempts: u64,
) -> Option<PowSolution> {
    assert!(target_exp <= 256, "digest space is 256 bits");
    let mut hasher_base = Sha256::new();
    hasher_base.update(epoch_randomness);
    hasher_base.update(identity_material);
    for nonce in 0..max_attempts {
        let mut hasher = hasher_base.clone();
        hasher.update(nonce.to_be_bytes());
        let digest: [u8; 32] = hasher.finalize().into();
        if digest_below_target(&digest, target_exp) {
            return Some(PowSolution { nonce, digest });
        }
    }
    None
}

/// True iff the big-endian integer value of `digest` is < 2^target_exp,
/// i.e. the leading 256 − target_exp bits are all zero.
fn digest_below_target(digest: &[u8; 32], target_exp: u32) -> bool {
    let zero_bits = 256 - target_exp as usize;
    let full_bytes = zero_bits / 8;
    let rem_bits = zero_bits % 8;
    if digest[..full_bytes].iter().any(|&b| b != 0) {
        return false;
    }
    if rem_bits > 0 {
        // The next byte's top rem_bits must be zero.
        if digest[full_bytes] >> (8 - rem_bits) != 0 {
            return false;
        }
    }
    true
}
