//! Monte Carlo epoch simulator: draw the ID selection, partition into
//! shards, and flag per-trial attack success. Trials are embarrassingly
//! parallel with a deterministic integer reduction, so reports are identical
//! for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::oracle::{exact_epoch_distribution as oracle_epoch, OracleError};
use crate::exactmath::ExactRational;
use crate::protocol::{validate_params, ProtocolError, ProtocolParams};
use crate::rng::derived_rng;
use crate::sampling::{sample_selected_sybil, sample_shard_sybil_counts};
use crate::stats::wilson_interval;

/// Seed-derivation tag for per-trial streams.
const TRIAL_STREAM_TAG: u64 = 0x5452;

/// One simulated epoch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochOutcome {
    /// Sybil IDs among the N* selected.
    pub n_selected: u64,
    /// Sybil count per shard; sums to `n_selected`.
    pub shard_counts: Vec<u64>,
    /// Some shard holds at least c − τ + 1 Sybil IDs.
    pub bcp_success: bool,
    /// Some shard holds at least τ Sybil IDs.
    pub gft_success: bool,
}

/// Aggregate over independent epochs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub p_bcp_hat: f64,
    pub p_gft_hat: f64,
    /// 95% Wilson intervals.
    pub ci_bcp: (f64, f64),
    pub ci_gft: (f64, f64),
    pub seed: u64,
    pub bcp_successes: u64,
    pub gft_successes: u64,
    /// (n, frequency) pairs over observed selected-Sybil counts; counts sum
    /// to `trials`.
    pub histogram_n: Vec<(u64, u64)>,
}

/// Simulate one epoch: select N* IDs uniformly without replacement from the
/// pool of M Sybil + (N − 1) honest IDs, partition them uniformly into 2^s
/// shards of exactly c, and evaluate both attack thresholds.
pub fn run_epoch<R: rand::Rng + ?Sized>(
    params: &ProtocolParams,
    m_sybil: u64,
    rng: &mut R,
) -> Result<EpochOutcome, ProtocolError> {
    validate_params(params, m_sybil)?;
    let n_selected = sample_selected_sybil(params, m_sybil, rng);
    let shard_counts = sample_shard_sybil_counts(params, n_selected, rng);
    let bcp_threshold = params.bcp_shard_threshold();
    let gft_threshold = params.gft_shard_threshold();
    let bcp_success = shard_counts.iter().any(|&a| a >= bcp_threshold);
    let gft_success = shard_counts.iter().any(|&a| a >= gft_threshold);
    Ok(EpochOutcome {
        n_selected,
        shard_counts,
        bcp_success,
        gft_success,
    })
}

#[derive(Clone)]
struct TrialAccumulator {
    bcp: u64,
    gft: u64,
    // Selected-n frequencies indexed from the support minimum.
    hist: Vec<u64>,
}

impl TrialAccumulator {
    fn new(support_len: usize) -> Self {
        TrialAccumulator {
            bcp: 0,
            gft: 0,
            hist: vec![0; support_len],
        }
    }

    fn merge(mut self, other: TrialAccumulator) -> TrialAccumulator {
        self.bcp += other.bcp;
        self.gft += other.gft;
        for (a, b) in self.hist.iter_mut().zip(other.hist) {
            *a += b;
        }
        self
    }
}

/// Run `trials` independent epochs. Each trial derives its own RNG stream
/// from `(master_seed, trial_index)`; the reduction is an integer sum, so the
/// report is byte-identical for every worker count.
pub fn run_trials(
    params: &ProtocolParams,
    m_sybil: u64,
    trials: u64,
    master_seed: u64,
    workers: usize,
) -> Result<SimulationReport, ProtocolError> {
    assert!(trials >= 1);
    validate_params(params, m_sybil)?;

    let honest = params.nodes - 1;
    let support_lo = params.n_star().saturating_sub(honest);
    let support_hi = m_sybil.min(params.n_star());
    let support_len = (support_hi - support_lo + 1) as usize;
    let bcp_threshold = params.bcp_shard_threshold();
    let gft_threshold = params.gft_shard_threshold();

    let simulate = || {
        (0..trials)
            .into_par_iter()
            .fold(
                || TrialAccumulator::new(support_len),
                |mut acc, trial| {
                    let mut rng = derived_rng(master_seed, &[TRIAL_STREAM_TAG, trial]);
                    let n = sample_selected_sybil(params, m_sybil, &mut rng);
                    let counts = sample_shard_sybil_counts(params, n, &mut rng);
                    if counts.iter().any(|&a| a >= bcp_threshold) {
                        acc.bcp += 1;
                    }
                    if counts.iter().any(|&a| a >= gft_threshold) {
                        acc.gft += 1;
                    }
                    acc.hist[(n - support_lo) as usize] += 1;
                    acc
                },
            )
            .reduce(|| TrialAccumulator::new(support_len), TrialAccumulator::merge)
    };

    let acc = if workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool")
            .install(simulate)
    } else {
        simulate()
    };

    let histogram_n = acc
        .hist
        .iter()
        .enumerate()
        .filter(|(_, &count)| count > 0)
        .map(|(i, &count)| (support_lo + i as u64, count))
        .collect();

    Ok(SimulationReport {
        trials,
        p_bcp_hat: acc.bcp as f64 / trials as f64,
        p_gft_hat: acc.gft as f64 / trials as f64,
        ci_bcp: wilson_interval(acc.bcp, trials),
        ci_gft: wilson_interval(acc.gft, trials),
        seed: master_seed,
        bcp_successes: acc.bcp,
        gft_successes: acc.gft,
        histogram_n,
    })
}

/// Exact (P_BCP, P_GFT) for one epoch by exhaustive enumeration; only
/// instances with N* within the oracle bound are accepted.
pub fn exhaustive_epoch_distribution(
    params: &ProtocolParams,
    m_sybil: u64,
) -> Result<(ExactRational, ExactRational), OracleError> {
    oracle_epoch(params, m_sybil)
}
