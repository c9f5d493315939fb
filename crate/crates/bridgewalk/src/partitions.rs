//! Counting integer partitions into distinct parts, with the classical
//! exponential bound that controls the span sums of the surgery argument.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

/// `Q(0..=n_max)` by 0/1-knapsack dynamic programming over the parts:
/// after processing parts up to `n_max`, entry `j` counts the partitions
/// of `j` into distinct parts.
pub fn distinct_partitions_table(n_max: usize) -> Vec<BigUint> {
    let mut dp = vec![BigUint::zero(); n_max + 1];
    dp[0] = BigUint::one();
    for part in 1..=n_max {
        for j in (part..=n_max).rev() {
            let add = dp[j - part].clone();
            dp[j] += add;
        }
    }
    dp
}

/// `Q(n)`: the number of partitions of `n` into distinct positive parts.
pub fn count_distinct_partitions(n: usize) -> BigUint {
    assert!(n <= 100_000, "n out of the supported range");
    distinct_partitions_table(n).pop().unwrap()
}

/// Outcome of checking `Q(n) <= exp(pi sqrt(n/3))`.
#[derive(Clone, Debug, Serialize)]
pub struct PartitionBoundCheck {
    pub n: usize,
    pub q_decimal_digits: usize,
    /// Upper bound for `ln Q(n)` derived from the bit length.
    pub ln_q_upper: f64,
    /// `pi sqrt(n/3)`.
    pub bound_exponent: f64,
    pub holds: bool,
}

/// Certified upper bound for `ln x` from the bit length: `x < 2^bits`.
fn ln_upper(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 52 {
        return x.to_f64().unwrap().ln();
    }
    (bits as f64) * std::f64::consts::LN_2
}

/// Check the exponential bound for a single value.
pub fn check_partition_bound(n: usize, q: &BigUint) -> PartitionBoundCheck {
    let bound_exponent = std::f64::consts::PI * ((n as f64) / 3.0).sqrt();
    let ln_q_upper = ln_upper(q);
    PartitionBoundCheck {
        n,
        q_decimal_digits: q.to_string().len(),
        ln_q_upper,
        bound_exponent,
        holds: n == 0 || ln_q_upper <= bound_exponent,
    }
}

/// Check the bound for every `1 <= n <= n_max`, returning the verdicts with
/// the least slack first.
pub fn check_partition_bounds_up_to(n_max: usize) -> Vec<PartitionBoundCheck> {
    let table = distinct_partitions_table(n_max);
    let mut out: Vec<PartitionBoundCheck> = (1..=n_max)
        .map(|n| check_partition_bound(n, &table[n]))
        .collect();
    out.sort_by(|a, b| {
        let sa = a.bound_exponent - a.ln_q_upper;
        let sb = b.bound_exponent - b.ln_q_upper;
        sa.partial_cmp(&sb).unwrap()
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: coefficients of the generating function
    /// `prod_{k=1..n} (1 + x^k)`, truncated at degree `n`.
    fn generating_function_coefficients(n: usize) -> Vec<BigUint> {
        let mut coeffs = vec![BigUint::zero(); n + 1];
        coeffs[0] = BigUint::one();
        for k in 1..=n {
            // Multiply by (1 + x^k): new[j] = old[j] + old[j-k].
            for j in (k..=n).rev() {
                let add = coeffs[j - k].clone();
                coeffs[j] += add;
            }
        }
        coeffs
    }

    #[test]
    fn known_values() {
        assert_eq!(count_distinct_partitions(0), BigUint::from(1u32));
        assert_eq!(count_distinct_partitions(1), BigUint::from(1u32));
        assert_eq!(count_distinct_partitions(2), BigUint::from(1u32));
        // {5}, {4,1}, {3,2}
        assert_eq!(count_distinct_partitions(5), BigUint::from(3u32));
        assert_eq!(count_distinct_partitions(10), BigUint::from(10u32));
    }

    #[test]
    fn dp_matches_generating_function_up_to_200() {
        let dp = distinct_partitions_table(200);
        let gf = generating_function_coefficients(200);
        assert_eq!(dp, gf);
    }

    #[test]
    fn exponential_bound_small_range() {
        for check in check_partition_bounds_up_to(2000) {
            assert!(
                check.holds,
                "bound fails at n = {}: ln Q <= {} vs {}",
                check.n, check.ln_q_upper, check.bound_exponent
            );
        }
        // The bound at n = 10 is roughly exp(5.74) ~ 310, far above Q = 10.
        let q10 = count_distinct_partitions(10);
        let c = check_partition_bound(10, &q10);
        assert!((c.bound_exponent - 5.736).abs() < 1e-3);
    }
}
