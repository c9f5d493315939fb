//! Exact arithmetic helpers shared across the crate.
//!
//! All weights, lengths and thresholds are kept as arbitrary-precision
//! rationals; floating-point values are derived views used only in reports.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

/// Exact rational value.
pub type Rat = BigRational;
/// Arbitrary-precision signed integer.
pub type Int = BigInt;

/// `n/d` as an exact rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer `n` as an exact rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parse "p/q" or "p" (optionally signed) into a rational.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    Rat::from_str(s.trim()).map_err(|e| format!("invalid rational {s:?}: {e}"))
}

/// Render a rational as "p" or "p/q".
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Nearest floating view of a rational. Falls back to a bit-length
/// based estimate for values outside the f64 range.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let ln = rat_ln(r);
        if ln > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    })
}

/// Natural logarithm of a positive rational, robust to values far
/// outside the f64 range.
pub fn rat_ln(r: &Rat) -> f64 {
    big_ln(r.numer()) - big_ln(r.denom())
}

fn big_ln(x: &BigInt) -> f64 {
    assert!(x.is_positive(), "logarithm of a non-positive integer");
    let mag = x.magnitude();
    let bits = mag.bits();
    if bits <= 52 {
        return (mag.to_f64().unwrap()).ln();
    }
    // Keep the top 52 bits as the mantissa and account for the shift.
    let shift = bits - 52;
    let top: BigUint = mag >> shift;
    (top.to_f64().unwrap()).ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Nonnegative integer power of a rational.
pub fn rat_pow(r: &Rat, k: u32) -> Rat {
    let mut acc = Rat::one();
    let mut base = r.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// `m`-th root of a rational as a float: exp(ln(r)/m).
pub fn rat_root_f64(r: &Rat, m: u32) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    (rat_ln(r) / f64::from(m)).exp()
}

/// Exact comparison `a^(1/an) <= b^(1/bn)` for nonnegative rationals,
/// performed by cross-raising both sides to integer powers.
pub fn root_le(a: &Rat, an: u32, b: &Rat, bn: u32) -> bool {
    assert!(!a.is_negative() && !b.is_negative());
    assert!(an > 0 && bn > 0);
    rat_pow(a, bn) <= rat_pow(b, an)
}

/// Exact comparison `x <= base^(p/q) * scale` for nonnegative values with
/// `base >= 0`, via raising both sides to the `q`-th power.
pub fn le_rat_pow_scaled(x: &Rat, base: &Rat, p: u32, q: u32, scale: &Rat) -> bool {
    assert!(q > 0);
    assert!(!x.is_negative() && !base.is_negative() && !scale.is_negative());
    rat_pow(x, q) <= rat_pow(base, p) * rat_pow(scale, q)
}

/// Ceiling of a nonnegative rational as u32. Panics on negative input.
pub fn rat_ceil_u32(r: &Rat) -> u32 {
    assert!(!r.is_negative());
    let c = r.ceil();
    c.numer().to_u32().expect("ceiling out of u32 range")
}

/// Serde adaptor storing a rational as a "p/q" string.
pub mod rat_string {
    use super::{format_rat, parse_rat, Rat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rat(&raw).map_err(serde::de::Error::custom)
    }
}

/// Serde adaptor for `Option<Rat>` as an optional "p/q" string.
pub mod opt_rat_string {
    use super::{format_rat, parse_rat, Rat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Rat>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_some(&format_rat(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rat>, D::Error> {
        let raw: Option<String> = Option::deserialize(d)?;
        raw.map(|t| parse_rat(&t).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["1/2", "-3/4", "7", "0", "22/7"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(format_rat(&r), s);
        }
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
    }

    #[test]
    fn root_comparison_is_exact() {
        // 2^(1/2) <= 3^(1/2), 4^(1/2) == 2^(1/1)
        assert!(root_le(&rat_int(2), 2, &rat_int(3), 2));
        assert!(root_le(&rat_int(4), 2, &rat_int(2), 1));
        assert!(root_le(&rat_int(2), 1, &rat_int(4), 2));
        // 284^(1/5) > 2^(1/1)
        assert!(!root_le(&rat_int(284), 5, &rat_int(2), 1));
    }

    #[test]
    fn big_logarithms() {
        let big = rat_pow(&rat_int(10), 400);
        let ln = rat_ln(&big);
        assert!((ln - 400.0 * std::f64::consts::LN_10).abs() < 1e-6);
        assert_eq!(rat_to_f64(&big), f64::INFINITY);
    }

    #[test]
    fn scaled_power_comparison() {
        // 8 <= 2^(3/1) * 1
        assert!(le_rat_pow_scaled(
            &rat_int(8),
            &rat_int(2),
            3,
            1,
            &Rat::one()
        ));
        // 9 > 2^(3/1)
        assert!(!le_rat_pow_scaled(
            &rat_int(9),
            &rat_int(2),
            3,
            1,
            &Rat::one()
        ));
        // (3/2)^(3/2): 1.837...; 11/6 = 1.833... <= it
        assert!(le_rat_pow_scaled(
            &rat(11, 6),
            &rat(3, 2),
            3,
            2,
            &Rat::one()
        ));
    }
}
