//! Cross-module consistency: the hybrid engine against the enumeration
//! oracle and the simulator, plus regime and ordering properties.

use shardsybil::analytics::oracle::{exact_attack_probability, rational_to_f64};
use shardsybil::analytics::{
    attack_probability, per_shard_threshold_closed, per_shard_threshold_mc, Attack, McConfig,
};
use shardsybil::protocol::ProtocolParams;
use shardsybil::rng::{derive_seed, derived_rng};
use shardsybil::sampling::any_shard_reaches;
use shardsybil::sim::run_trials;

#[test]
fn monotone_in_sybil_count_with_ci_slack() {
    let p = ProtocolParams::new(20, 2, 4, 3).unwrap();
    for attack in [Attack::Bcp, Attack::Gft] {
        let mut previous = 0.0f64;
        for m in 0..40 {
            let res = attack_probability(attack, m, &p, &McConfig::with_seed(31)).unwrap();
            assert!(
                res.value >= previous - 0.011,
                "{attack} not monotone at M={m}: {} < {previous}",
                res.value
            );
            previous = previous.max(res.value);
        }
    }
}

#[test]
fn gft_bounded_by_bcp_on_oracle() {
    // τ >= c − τ + 1 for τ=3, c=4: exact ordering, no slack needed.
    let p = ProtocolParams::new(9, 1, 4, 3).unwrap();
    for m in 0..=12 {
        let bcp = exact_attack_probability(&p, Attack::Bcp, m).unwrap();
        let gft = exact_attack_probability(&p, Attack::Gft, m).unwrap();
        assert!(gft <= bcp, "M={m}");
    }
}

#[test]
fn closed_and_mc_regimes_agree_at_capacity() {
    // At n = c both the closed form and the estimator apply. Where no two
    // shards can cross the threshold simultaneously (c < 2·threshold) the
    // closed form is exact and must sit inside the 95% CI; elsewhere it is
    // a union bound and must dominate the estimate.
    for (nodes, s, c, tau) in [(14u64, 2u32, 3u64, 2u64), (20, 2, 4, 3), (50, 3, 6, 4)] {
        let p = ProtocolParams::new(nodes, s, c, tau).unwrap();
        for threshold in [p.bcp_shard_threshold(), p.gft_shard_threshold()] {
            let closed = per_shard_threshold_closed(c, threshold, &p).unwrap();
            let mc = McConfig {
                max_trials: 400_000,
                target_half_width: 0.002,
                seed: 77,
                ..McConfig::default()
            };
            let est = per_shard_threshold_mc(c, threshold, &p, &mc, derive_seed(77, &[c, threshold]));
            let (lo, hi) = est.ci.unwrap();
            if c < 2 * threshold {
                assert!(
                    closed.clamped_value >= lo - 0.01 && closed.clamped_value <= hi + 0.01,
                    "s={s} c={c} t={threshold}: closed {} vs CI [{lo}, {hi}]",
                    closed.clamped_value
                );
            } else {
                assert!(
                    closed.raw_value >= lo - 0.01,
                    "s={s} c={c} t={threshold}: union bound {} below CI [{lo}, {hi}]",
                    closed.raw_value
                );
            }
        }
    }
}

#[test]
fn pigeonhole_trials_always_succeed() {
    // n > 2^s(c−τ) guarantees a shard with at least c−τ+1 Sybil IDs.
    let p = ProtocolParams::new(14, 2, 3, 2).unwrap();
    let bcp_t = p.bcp_shard_threshold();
    let bound = p.num_shards() * (bcp_t - 1);
    let n = bound + 1;
    let mut rng = derived_rng(123, &[]);
    for _ in 0..100_000 {
        assert!(any_shard_reaches(&p, n, bcp_t, &mut rng));
    }
    // Same with the GFT threshold τ.
    let gft_t = p.gft_shard_threshold();
    let n = p.num_shards() * (gft_t - 1) + 1;
    for _ in 0..100_000 {
        assert!(any_shard_reaches(&p, n, gft_t, &mut rng));
    }
}

#[test]
fn hybrid_engine_matches_simulation_mid_curve() {
    // Midpoint of the fig-2b style curve, where all three regimes carry mass.
    let p = ProtocolParams::new(200, 2, 50, 34).unwrap();
    let m = 85;
    let analytic = attack_probability(Attack::Bcp, m, &p, &McConfig::with_seed(19)).unwrap();
    let sim = run_trials(&p, m, 100_000, 20, 0).unwrap();
    assert!(
        (analytic.value - sim.p_bcp_hat).abs() < 0.02,
        "analytic {} vs simulated {}",
        analytic.value,
        sim.p_bcp_hat
    );
}

#[test]
fn oracle_simulation_and_engine_threeway_agreement() {
    let p = ProtocolParams::new(9, 1, 4, 3).unwrap();
    for (attack, m) in [(Attack::Bcp, 3u64), (Attack::Gft, 5), (Attack::Bcp, 8)] {
        let exact = rational_to_f64(&exact_attack_probability(&p, attack, m).unwrap());
        let engine = attack_probability(attack, m, &p, &McConfig::with_seed(3)).unwrap();
        let sim = run_trials(&p, m, 100_000, 4, 0).unwrap();
        let simulated = match attack {
            Attack::Bcp => sim.p_bcp_hat,
            Attack::Gft => sim.p_gft_hat,
        };
        assert!((engine.value - exact).abs() < 0.02, "{attack} M={m} engine vs oracle");
        assert!((simulated - exact).abs() < 0.01, "{attack} M={m} sim vs oracle");
    }
}

#[test]
fn capacity_up_attack_probability_down() {
    // Fixed N and shard count: growing shard capacity dilutes the adversary.
    let nodes = 19_201;
    let mc = McConfig {
        max_trials: 20_000,
        target_half_width: 0.01,
        seed: 42,
        ..McConfig::default()
    };
    let mut previous = f64::INFINITY;
    for c in [100u64, 200, 400] {
        let tau = (2 * c).div_ceil(3); // ceil(2c/3)
        let p = ProtocolParams::new(nodes, 2, c, tau).unwrap();
        let m = 8_229; // rho = 0.3 of 19200 honest IDs
        let value = attack_probability(Attack::Bcp, m, &p, &mc).unwrap().value;
        assert!(
            value <= previous + 0.03,
            "P_B rose with capacity: c={c} gives {value} after {previous}"
        );
        previous = value;
    }
}

#[test]
fn shards_up_attack_probability_up() {
    let nodes = 3_201;
    let mc = McConfig {
        max_trials: 20_000,
        target_half_width: 0.01,
        seed: 42,
        ..McConfig::default()
    };
    let mut previous = -f64::INFINITY;
    for s in [2u32, 3, 4] {
        let p = ProtocolParams::new(nodes, s, 100, 67).unwrap();
        let m = 1_371; // rho = 0.3 of 3200 honest IDs
        let value = attack_probability(Attack::Bcp, m, &p, &mc).unwrap().value;
        assert!(
            value >= previous - 0.03,
            "P_B fell with shard count: s={s} gives {value} after {previous}"
        );
        previous = value;
    }
}

#[test]
fn engine_results_identical_across_worker_counts() {
    let p = ProtocolParams::new(200, 2, 50, 34).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| attack_probability(Attack::Bcp, 85, &p, &McConfig::with_seed(55)).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one, four);
}
