//! Numerically safe combinatorics: exact big-integer binomials for small
//! instances, log-domain evaluation for instances far beyond f64 range, and
//! stable summation of ratio-of-binomial expressions.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use statrs::function::gamma::ln_gamma;

/// Natural logarithm of a non-negative real. `f64::NEG_INFINITY` is the
/// distinguished representation of log(0).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogProb(pub f64);

impl LogProb {
    /// log(0)
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    /// log(1)
    pub const ONE: LogProb = LogProb(0.0);

    pub fn from_ln(ln_value: f64) -> Self {
        LogProb(ln_value)
    }

    /// The wrapped natural logarithm.
    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn exp(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

/// Exact rational with arbitrary-precision numerator and denominator.
/// The backing type keeps the denominator positive and the fraction in
/// lowest terms.
pub type ExactRational = num_rational::BigRational;

/// C(n, k) as an exact big integer. Returns 0 when `k < 0` or `k > n`.
pub fn binom(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigUint::one();
    for i in 0..k {
        // Each step holds C(n-k+i+1, i+1), so the division is exact.
        acc = acc * (n - k + i + 1) / (i + 1);
    }
    acc
}

/// ln C(n, k) via log-gamma. Representable even where C(n, k) overflows any
/// fixed-width float; log(0) when `k < 0` or `k > n`.
pub fn log_binom(n: u64, k: i64) -> LogProb {
    if k < 0 || k as u64 > n {
        return LogProb::ZERO;
    }
    let k = k as u64;
    if k == 0 || k == n {
        return LogProb::ONE;
    }
    let ln = ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0);
    LogProb(ln)
}

/// Streaming log-sum-exp accumulator: feeds of ln-values, yields ln of the
/// sum of their exponentials. Rescales on a new maximum, so no intermediate
/// overflow for any input magnitudes.
#[derive(Clone, Copy, Debug)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub fn push(&mut self, ln_value: f64) {
        if ln_value == f64::NEG_INFINITY {
            return;
        }
        if ln_value <= self.max {
            self.sum += (ln_value - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - ln_value).exp() + 1.0;
            self.max = ln_value;
        }
    }

    /// ln of the accumulated sum; log(0) if nothing finite was pushed.
    pub fn ln_value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }

    pub fn value(&self) -> f64 {
        self.ln_value().exp()
    }
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

/// ln Σ exp(v) over a slice; log(0) for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let mut acc = LogSumExp::new();
    for &v in values {
        acc.push(v);
    }
    acc.ln_value()
}

/// One term of a sum of binomial ratios, both parts in the log domain.
#[derive(Clone, Copy, Debug)]
pub struct RatioTerm {
    pub log_numerator: LogProb,
    pub log_denominator: LogProb,
}

/// Σ exp(log_numerator − log_denominator), evaluated via log-sum-exp.
/// Terms with a log-zero numerator vanish; an empty sequence sums to 0.
pub fn sum_ratio_terms(terms: &[RatioTerm]) -> f64 {
    let mut acc = LogSumExp::new();
    for term in terms {
        if term.log_numerator.is_zero() {
            continue;
        }
        acc.push(term.log_numerator.ln() - term.log_denominator.ln());
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn factorial(n: u64) -> BigUint {
        (1..=n).fold(BigUint::one(), |acc, i| acc * i)
    }

    #[test]
    fn binom_identity_cases() {
        assert_eq!(binom(5, 0), BigUint::from(1u32));
        assert_eq!(binom(5, 2), BigUint::from(10u32));
        assert_eq!(binom(0, 0), BigUint::from(1u32));
    }

    #[test]
    fn binom_out_of_range_is_zero() {
        assert_eq!(binom(5, -1), BigUint::zero());
        assert_eq!(binom(5, 6), BigUint::zero());
    }

    #[test]
    fn binom_matches_factorial_definition() {
        // 52!/(5!·47!)
        let expect = factorial(52) / (factorial(5) * factorial(47));
        assert_eq!(binom(52, 5), expect);
        assert_eq!(binom(52, 5), BigUint::from(2_598_960u64));
    }

    #[test]
    fn log_binom_matches_exact_small() {
        let got = log_binom(5, 2).ln();
        assert!((got - 10.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn log_binom_exact_agreement_up_to_64() {
        for n in 0..=64u64 {
            for k in 0..=n {
                let exact = binom(n, k as i64).to_f64().unwrap();
                let via_log = log_binom(n, k as i64).exp();
                assert!(
                    (via_log - exact).abs() / exact <= 1e-10,
                    "n={n} k={k}: {via_log} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn log_binom_representable_beyond_float_range() {
        let lb = log_binom(10_000, 5_000);
        assert!(lb.ln().is_finite());
        // The linear-domain value overflows f64.
        assert!(lb.exp().is_infinite());
    }

    #[test]
    fn log_binom_out_of_range_is_log_zero() {
        assert!(log_binom(600, 601).is_zero());
        assert!(log_binom(600, -1).is_zero());
    }

    #[test]
    fn sum_ratio_terms_halves() {
        let half = RatioTerm {
            log_numerator: LogProb::ONE,
            log_denominator: LogProb::from_ln(2.0f64.ln()),
        };
        let got = sum_ratio_terms(&[half, half]);
        assert!((got - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sum_ratio_terms_empty_is_zero() {
        assert_eq!(sum_ratio_terms(&[]), 0.0);
    }

    #[test]
    fn sum_ratio_terms_many_small_terms() {
        let term = RatioTerm {
            log_numerator: LogProb::ONE,
            log_denominator: LogProb::from_ln(1000.0f64.ln()),
        };
        let terms = vec![term; 1000];
        let got = sum_ratio_terms(&terms);
        assert!((got - 1.0).abs() < 1e-9);
    }

    #[test]
    fn log_sum_exp_handles_large_magnitudes() {
        // ln(e^1234 + e^1232) = 1234 + ln(1 + e^-2)
        let got = log_sum_exp(&[1234.0, 1232.0]);
        let expect = 1234.0 + (-2.0f64).exp().ln_1p();
        assert!((got - expect).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn binom_symmetry(n in 0u64..120, k in 0u64..120) {
            prop_assume!(k <= n);
            prop_assert_eq!(binom(n, k as i64), binom(n, (n - k) as i64));
        }

        #[test]
        fn binom_pascal_rule(n in 1u64..100, k in 1u64..100) {
            prop_assume!(k < n);
            let lhs = binom(n, k as i64);
            let rhs = binom(n - 1, k as i64 - 1) + binom(n - 1, k as i64);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn sum_ratio_terms_permutation_invariant(
            lns in proptest::collection::vec((-30.0f64..30.0, -30.0f64..30.0), 1..40),
            shift in 0usize..40,
        ) {
            let terms: Vec<RatioTerm> = lns
                .iter()
                .map(|&(n, d)| RatioTerm {
                    log_numerator: LogProb::from_ln(n),
                    log_denominator: LogProb::from_ln(d),
                })
                .collect();
            let mut rotated = terms.clone();
            rotated.rotate_left(shift % terms.len());
            let a = sum_ratio_terms(&terms);
            let b = sum_ratio_terms(&rotated);
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
