//! The analytic probability engine: hypergeometric ID-selection law,
//! per-shard threshold probabilities, and piecewise attack success
//! probabilities combining closed forms, conditional Monte Carlo estimation,
//! and the pigeonhole certainty regime.

pub mod oracle;

use std::collections::HashMap;
use std::fmt;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::{binom, log_binom, ExactRational, LogSumExp};
use crate::protocol::{validate_params, ProtocolError, ProtocolParams};
use crate::rng::{derive_seed, derived_rng, DEFAULT_SEED};
use crate::sampling::any_shard_reaches;
use crate::stats::{wilson_half_width, wilson_interval};

/// Seed-derivation tag for per-n conditional Monte Carlo streams.
const MC_STREAM_TAG: u64 = 0x4d43;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("closed form is only valid for n <= capacity (n={n}, capacity={capacity}); larger n must use the Monte Carlo estimator")]
    ClosedFormOutOfRange { n: u64, capacity: u64 },
}

/// The two Sybil attacks on a shard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attack {
    /// Break Consensus Protocol: veto a shard's consensus with
    /// at least c − τ + 1 Sybil IDs in that shard.
    Bcp,
    /// Generate Fake Transaction: dictate a shard's output with
    /// at least τ Sybil IDs in that shard.
    Gft,
}

impl Attack {
    /// Sybil IDs required in a single shard for this attack.
    pub fn shard_threshold(self, params: &ProtocolParams) -> u64 {
        match self {
            Attack::Bcp => params.bcp_shard_threshold(),
            Attack::Gft => params.gft_shard_threshold(),
        }
    }

    fn seed_tag(self) -> u64 {
        match self {
            Attack::Bcp => 0,
            Attack::Gft => 1,
        }
    }
}

impl fmt::Display for Attack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Attack::Bcp => f.write_str("bcp"),
            Attack::Gft => f.write_str("gft"),
        }
    }
}

/// Distribution of the number of adversary IDs among the N* selected from a
/// pool of `m_sybil` Sybil plus `nodes − 1` honest IDs.
#[derive(Debug, Clone)]
pub struct SelectionDistribution {
    m_sybil: u64,
    nodes: u64,
    n_star: u64,
    support_lo: u64,
    log_pmf: Vec<f64>,
}

/// The hypergeometric law of the selected Sybil count.
pub fn selection_pmf(
    m_sybil: u64,
    nodes: u64,
    n_star: u64,
) -> Result<SelectionDistribution, ProtocolError> {
    SelectionDistribution::new(m_sybil, nodes, n_star)
}

impl SelectionDistribution {
    pub fn new(m_sybil: u64, nodes: u64, n_star: u64) -> Result<Self, ProtocolError> {
        if nodes == 0 {
            return Err(ProtocolError::TooFewNodes(0));
        }
        let honest = nodes - 1;
        let pool = m_sybil + honest;
        if pool < n_star {
            return Err(ProtocolError::PoolTooSmall {
                available: pool,
                required: n_star,
            });
        }
        let support_lo = n_star.saturating_sub(honest);
        let support_hi = m_sybil.min(n_star);
        let ln_denom = log_binom(pool, n_star as i64).ln();
        let log_pmf = (support_lo..=support_hi)
            .map(|n| {
                log_binom(m_sybil, n as i64).ln()
                    + log_binom(honest, (n_star - n) as i64).ln()
                    - ln_denom
            })
            .collect();
        Ok(SelectionDistribution {
            m_sybil,
            nodes,
            n_star,
            support_lo,
            log_pmf,
        })
    }

    /// Support of the selected Sybil count:
    /// [max(0, N* − (N−1)), min(M, N*)].
    pub fn support(&self) -> RangeInclusive<u64> {
        self.support_lo..=(self.support_lo + self.log_pmf.len() as u64 - 1)
    }

    pub fn log_pmf(&self, n: u64) -> f64 {
        if n < self.support_lo {
            return f64::NEG_INFINITY;
        }
        self.log_pmf
            .get((n - self.support_lo) as usize)
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    }

    pub fn pmf(&self, n: u64) -> f64 {
        self.log_pmf(n).exp()
    }

    /// Total probability mass; equals 1 up to log-gamma rounding.
    pub fn total_mass(&self) -> f64 {
        let mut acc = LogSumExp::new();
        for &lp in &self.log_pmf {
            acc.push(lp);
        }
        acc.value()
    }

    /// Exact rational pmf value (big-integer backend), for oracles and tests.
    pub fn exact_pmf(&self, n: u64) -> ExactRational {
        if !self.support().contains(&n) {
            return ExactRational::from_integer(0.into());
        }
        let honest = self.nodes - 1;
        let pool = self.m_sybil + honest;
        let num = binom(self.m_sybil, n as i64) * binom(honest, (self.n_star - n) as i64);
        ExactRational::new(num.into(), binom(pool, self.n_star as i64).into())
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        let lo = self.support_lo;
        self.log_pmf.iter().enumerate().map(move |(i, &lp)| (lo + i as u64, lp.exp()))
    }
}

/// Evaluation regime of a per-shard threshold probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Below the feasibility threshold; probability is exactly 0.
    Zero,
    /// Union-bound closed form, valid for n <= c.
    ClosedForm,
    /// Conditional Monte Carlo, for c < n <= 2^s(threshold − 1).
    MonteCarlo,
    /// Pigeonhole certainty: n > 2^s(threshold − 1) forces some shard over
    /// the threshold, so the probability is exactly 1.
    Certain,
}

/// Probability that at least one shard holds `threshold` or more Sybil IDs,
/// conditional on n selected Sybil IDs, plus evaluation metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdProbability {
    pub threshold: u64,
    pub regime: Regime,
    /// As computed; the closed form is a union bound and may exceed 1.
    pub raw_value: f64,
    /// min(raw_value, 1).
    pub clamped_value: f64,
    pub ci: Option<(f64, f64)>,
    pub trials: Option<u64>,
}

/// Union-bound closed form for the per-shard threshold probability:
/// 2^s · Σ_{m=threshold}^{n} C(n,m) C(N*−n, c−m) / C(N*, c).
///
/// Valid only for n <= c; the raw value double counts outcomes where several
/// shards cross the threshold and can exceed 1.
pub fn per_shard_threshold_closed(
    n: u64,
    threshold: u64,
    params: &ProtocolParams,
) -> Result<ThresholdProbability, AnalyticsError> {
    let capacity = params.capacity;
    if n > capacity {
        return Err(AnalyticsError::ClosedFormOutOfRange { n, capacity });
    }
    let n_star = params.n_star();
    let ln_denom = log_binom(n_star, capacity as i64).ln();
    let mut acc = LogSumExp::new();
    for m in threshold..=n {
        let ln_term = log_binom(n, m as i64).ln()
            + log_binom(n_star - n, (capacity - m) as i64).ln();
        acc.push(ln_term);
    }
    let raw = (params.shard_exp as f64 * std::f64::consts::LN_2 + acc.ln_value() - ln_denom).exp();
    Ok(ThresholdProbability {
        threshold,
        regime: Regime::ClosedForm,
        raw_value: raw,
        clamped_value: raw.min(1.0),
        ci: None,
        trials: None,
    })
}

/// Controls for conditional Monte Carlo estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    /// Trial budget per conditional estimate.
    pub max_trials: u64,
    /// Stop early once the 95% Wilson half-width drops below this.
    pub target_half_width: f64,
    /// Trials between half-width checks.
    pub batch: u64,
    /// Support points with less probability mass than this are skipped in
    /// the hybrid sum; each contributes at most its mass to the result.
    pub mass_cutoff: f64,
    /// Master seed; per-n streams are derived from it.
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            max_trials: 60_000,
            target_half_width: 0.005,
            batch: 2_000,
            mass_cutoff: 1e-14,
            seed: DEFAULT_SEED,
        }
    }
}

impl McConfig {
    pub fn with_seed(seed: u64) -> Self {
        McConfig {
            seed,
            ..Self::default()
        }
    }
}

/// Monte Carlo estimate of the per-shard threshold probability conditional on
/// n selected Sybil IDs: repeatedly partition n Sybil + (N* − n) honest IDs
/// uniformly into 2^s shards of exactly c and count trials where some shard
/// reaches the threshold. Batches stop once the Wilson half-width target or
/// the trial budget is reached.
pub fn per_shard_threshold_mc(
    n: u64,
    threshold: u64,
    params: &ProtocolParams,
    mc: &McConfig,
    seed: u64,
) -> ThresholdProbability {
    assert!(n <= params.n_star(), "cannot select more Sybil IDs than N*");
    assert!(mc.max_trials >= 1 && mc.batch >= 1);
    let mut rng = derived_rng(seed, &[]);
    let mut successes = 0u64;
    let mut trials = 0u64;
    while trials < mc.max_trials {
        let batch = mc.batch.min(mc.max_trials - trials);
        for _ in 0..batch {
            if any_shard_reaches(params, n, threshold, &mut rng) {
                successes += 1;
            }
        }
        trials += batch;
        if wilson_half_width(successes, trials) <= mc.target_half_width {
            break;
        }
    }
    let estimate = successes as f64 / trials as f64;
    let pigeonhole_bound = params.num_shards() * (threshold - 1);
    let regime = if n > pigeonhole_bound {
        Regime::Certain
    } else {
        Regime::MonteCarlo
    };
    ThresholdProbability {
        threshold,
        regime,
        raw_value: estimate,
        clamped_value: estimate,
        ci: Some(wilson_interval(successes, trials)),
        trials: Some(trials),
    }
}

/// How an attack probability was assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Every contributing term came from the closed form.
    ClosedForm,
    /// Closed form plus conditional Monte Carlo terms.
    Hybrid,
    /// Closed form plus certainty-regime mass, no Monte Carlo needed.
    CertainTail,
}

/// Contribution of one contiguous run of support points sharing a regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeComponent {
    /// Inclusive range of selected-Sybil counts n.
    pub n_range: (u64, u64),
    pub method: Regime,
    /// Selection probability mass carried by the range.
    pub mass: f64,
    /// Raw contribution of the range to the attack probability.
    pub contribution: f64,
}

/// Success probability of an attack, with raw (union-bound) and clamped
/// values, the evaluation method, and a per-regime breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackProbability {
    pub attack: Attack,
    pub params: ProtocolParams,
    #[serde(rename = "M")]
    pub m_sybil: u64,
    /// Clamped probability in [0, 1].
    pub value: f64,
    /// Σ_n pmf(n) · T(n) with union-bound closed-form terms; may exceed 1.
    pub raw_value: f64,
    pub method: Method,
    pub ci: Option<(f64, f64)>,
    /// Total Monte Carlo trials spent across conditional estimates.
    pub trials: u64,
    pub seed: u64,
    pub regime_breakdown: Vec<RegimeComponent>,
    /// True when any per-n closed-form term exceeded 1 (union-bound
    /// over-count) or the assembled raw value does.
    pub raw_over_one: bool,
}

fn regime_for(n: u64, threshold: u64, capacity: u64, pigeonhole_bound: u64) -> Regime {
    if n < threshold {
        Regime::Zero
    } else if n > pigeonhole_bound {
        Regime::Certain
    } else if n <= capacity {
        Regime::ClosedForm
    } else {
        Regime::MonteCarlo
    }
}

/// Success probability of `attack` with `m_sybil` adversary IDs in the pool:
/// P = Σ_n pmf(n) · T(n), where T(n) is 0 below the feasibility threshold,
/// the union-bound closed form for feasible n ≤ c, a conditional Monte Carlo
/// estimate for c < n ≤ 2^s(threshold − 1), and exactly 1 above that
/// pigeonhole bound.
pub fn attack_probability(
    attack: Attack,
    m_sybil: u64,
    params: &ProtocolParams,
    mc: &McConfig,
) -> Result<AttackProbability, AnalyticsError> {
    validate_params(params, m_sybil)?;
    let dist = SelectionDistribution::new(m_sybil, params.nodes, params.n_star())?;
    let threshold = attack.shard_threshold(params);
    let capacity = params.capacity;
    let pigeonhole_bound = params.num_shards() * (threshold - 1);

    // Conditional Monte Carlo estimates, one independent stream per n.
    // Negligible-mass points are skipped; each adds at most its mass to the
    // total, so the omission is far below every reported tolerance.
    let mc_points: Vec<u64> = dist
        .support()
        .filter(|&n| {
            regime_for(n, threshold, capacity, pigeonhole_bound) == Regime::MonteCarlo
                && dist.pmf(n) >= mc.mass_cutoff
        })
        .collect();
    let mc_estimates: HashMap<u64, ThresholdProbability> = mc_points
        .par_iter()
        .map(|&n| {
            let seed = derive_seed(mc.seed, &[MC_STREAM_TAG, attack.seed_tag(), n, threshold]);
            (n, per_shard_threshold_mc(n, threshold, params, mc, seed))
        })
        .collect();

    // Deterministic reduction in ascending n, running sums in the log domain.
    let mut total = LogSumExp::new();
    let mut raw_over_one = false;
    let mut total_trials = 0u64;
    let mut ci_half_width = 0.0f64;
    let mut breakdown: Vec<RegimeComponent> = Vec::new();
    let mut run: Option<(Regime, u64, u64, f64, LogSumExp)> = None;

    for n in dist.support() {
        let regime = regime_for(n, threshold, capacity, pigeonhole_bound);
        let log_mass = dist.log_pmf(n);
        let ln_term = match regime {
            Regime::Zero => f64::NEG_INFINITY,
            Regime::ClosedForm => {
                let tp = per_shard_threshold_closed(n, threshold, params)
                    .expect("n <= capacity in closed regime");
                raw_over_one |= tp.raw_value > 1.0;
                log_mass + tp.raw_value.ln()
            }
            Regime::MonteCarlo => match mc_estimates.get(&n) {
                Some(tp) => {
                    total_trials += tp.trials.unwrap_or(0);
                    if let Some((lo, hi)) = tp.ci {
                        ci_half_width += dist.pmf(n) * (hi - lo) / 2.0;
                    }
                    log_mass + tp.raw_value.ln()
                }
                None => f64::NEG_INFINITY, // skipped negligible mass
            },
            Regime::Certain => log_mass,
        };
        total.push(ln_term);

        match &mut run {
            Some((r, _, hi, mass, contrib)) if *r == regime => {
                *hi = n;
                *mass += dist.pmf(n);
                contrib.push(ln_term);
            }
            _ => {
                if let Some((r, lo, hi, mass, contrib)) = run.take() {
                    breakdown.push(RegimeComponent {
                        n_range: (lo, hi),
                        method: r,
                        mass,
                        contribution: contrib.value(),
                    });
                }
                let mut contrib = LogSumExp::new();
                contrib.push(ln_term);
                run = Some((regime, n, n, dist.pmf(n), contrib));
            }
        }
    }
    if let Some((r, lo, hi, mass, contrib)) = run.take() {
        breakdown.push(RegimeComponent {
            n_range: (lo, hi),
            method: r,
            mass,
            contribution: contrib.value(),
        });
    }

    let raw_value = total.value();
    raw_over_one |= raw_value > 1.0;
    let value = raw_value.min(1.0);
    let used_mc = !mc_points.is_empty();
    let certain_mass = breakdown
        .iter()
        .filter(|comp| comp.method == Regime::Certain)
        .map(|comp| comp.mass)
        .sum::<f64>();
    let method = if used_mc {
        Method::Hybrid
    } else if certain_mass > 0.0 {
        Method::CertainTail
    } else {
        Method::ClosedForm
    };
    let ci = used_mc.then(|| {
        (
            (value - ci_half_width).max(0.0),
            (value + ci_half_width).min(1.0),
        )
    });

    Ok(AttackProbability {
        attack,
        params: *params,
        m_sybil,
        value,
        raw_value,
        method,
        ci,
        trials: total_trials,
        seed: mc.seed,
        regime_breakdown: breakdown,
        raw_over_one,
    })
}
