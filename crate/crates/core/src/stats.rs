//! Binomial-proportion confidence intervals and goodness-of-fit helpers.

/// Normal quantile for a two-sided 95% interval.
pub const Z_95: f64 = 1.959963984540054;

/// Wilson score interval at 95% confidence. Well-behaved at p̂ ∈ {0, 1},
/// unlike the normal-approximation interval.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0, "wilson_interval requires at least one trial");
    assert!(successes <= trials);
    let n = trials as f64;
    let p_hat = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let margin = (Z_95 / denom) * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt();
    // The bounds are exactly 0 and 1 at the extremes; center ± margin only
    // reproduces that up to rounding.
    let lo = if successes == 0 { 0.0 } else { (center - margin).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + margin).min(1.0) };
    (lo, hi)
}

/// Half of the Wilson interval width.
pub fn wilson_half_width(successes: u64, trials: u64) -> f64 {
    let (lo, hi) = wilson_interval(successes, trials);
    (hi - lo) / 2.0
}

/// Pearson chi-square statistic with low-expectation bins merged (Cochran's
/// rule: expected count ≥ 5 per cell). Returns `(statistic, degrees_of_freedom)`,
/// or `None` when fewer than two merged bins remain.
pub fn chi_square_statistic(observed: &[u64], expected: &[f64]) -> Option<(f64, usize)> {
    assert_eq!(observed.len(), expected.len());
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut acc_obs = 0.0;
    let mut acc_exp = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        acc_obs += o as f64;
        acc_exp += e;
        if acc_exp >= 5.0 {
            bins.push((acc_obs, acc_exp));
            acc_obs = 0.0;
            acc_exp = 0.0;
        }
    }
    // Fold the remainder into the last bin.
    if acc_exp > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += acc_obs;
                last.1 += acc_exp;
            }
            None => bins.push((acc_obs, acc_exp)),
        }
    }
    if bins.len() < 2 {
        return None;
    }
    let stat = bins
        .iter()
        .map(|&(o, e)| (o - e) * (o - e) / e)
        .sum::<f64>();
    Some((stat, bins.len() - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_point_estimate() {
        let (lo, hi) = wilson_interval(40, 100);
        assert!(lo < 0.4 && 0.4 < hi);
        assert!((hi - lo) < 0.2);
    }

    #[test]
    fn wilson_behaves_at_extremes() {
        let (lo, hi) = wilson_interval(0, 1000);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.01);

        let (lo, hi) = wilson_interval(1000, 1000);
        assert_eq!(hi, 1.0);
        assert!(lo < 1.0 && lo > 0.99);
    }

    #[test]
    fn wilson_narrows_with_trials() {
        assert!(wilson_half_width(50, 100) > wilson_half_width(500, 1000));
    }

    #[test]
    fn chi_square_merges_small_bins() {
        let observed = [1u64, 2, 3, 100, 95];
        let expected = [1.0, 2.0, 3.0, 98.0, 97.0];
        let (stat, df) = chi_square_statistic(&observed, &expected).unwrap();
        assert!(df <= 3);
        assert!(stat >= 0.0);
    }

    #[test]
    fn chi_square_perfect_fit_is_zero() {
        let observed = [10u64, 20, 30];
        let expected = [10.0, 20.0, 30.0];
        let (stat, _) = chi_square_statistic(&observed, &expected).unwrap();
        assert!(stat.abs() < 1e-12);
    }
}
