//! Fixed-point decimals with directed rounding.
//!
//! Every bound in this crate is rounded by an exact integer comparison, never
//! by formatting a float: the returned digits are the smallest (or largest)
//! decimal at the requested scale on the correct side of the true value.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    Up,
    Down,
}

/// `mantissa / 10^scale`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Decimal {
    mantissa: BigInt,
    scale: u32,
}

pub fn pow10(k: u32) -> BigUint {
    BigUint::from(10u32).pow(k)
}

impl Decimal {
    pub fn new(mantissa: BigInt, scale: u32) -> Self {
        Decimal { mantissa, scale }
    }

    pub fn from_integer(v: i64) -> Self {
        Decimal::new(BigInt::from(v), 0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// Same value at a larger scale.
    pub fn rescaled(&self, scale: u32) -> Decimal {
        assert!(scale >= self.scale, "rescaling would drop digits");
        let factor = BigInt::from(pow10(scale - self.scale));
        Decimal::new(&self.mantissa * factor, scale)
    }

    pub fn to_f64(&self) -> f64 {
        // Parsing the printed form is exact to the nearest double.
        self.to_string().parse().unwrap_or(f64::NAN)
    }

    pub fn minus_integer(&self, k: i64) -> Decimal {
        let shift = BigInt::from(k) * BigInt::from(pow10(self.scale));
        Decimal::new(&self.mantissa - shift, self.scale)
    }

    /// Rounds `num / den` to `scale` decimals in the given direction.
    pub fn from_ratio(num: &BigUint, den: &BigUint, scale: u32, rounding: Rounding) -> Decimal {
        assert!(!den.is_zero(), "zero denominator");
        let scaled = num * pow10(scale);
        let (q, r) = scaled.div_rem(den);
        let q = match rounding {
            Rounding::Up if !r.is_zero() => q + 1u32,
            _ => q,
        };
        Decimal::new(BigInt::from(q), scale)
    }

    /// The fourth power minus one, rounded to `scale` decimals.
    pub fn fourth_power_minus_one(&self, scale: u32, rounding: Rounding) -> Decimal {
        assert!(self.mantissa.sign() != Sign::Minus, "negative base");
        let m = self.mantissa.magnitude();
        let num = m.pow(4u32);
        let den = pow10(4 * self.scale);
        Decimal::from_ratio(&num, &den, scale, rounding).minus_integer(1)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let neg = self.mantissa.sign() == Sign::Minus;
        let digits = self.mantissa.magnitude().to_str_radix(10);
        let scale = self.scale as usize;
        let padded = if digits.len() <= scale {
            format!("{}{}", "0".repeat(scale + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int, frac) = padded.split_at(padded.len() - scale);
        if neg {
            write!(f, "-")?;
        }
        if scale == 0 {
            write!(f, "{int}")
        } else {
            write!(f, "{int}.{frac}")
        }
    }
}

impl FromStr for Decimal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("not a decimal: {s:?}"));
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() || !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let mag: BigUint = format!("{int}{frac}").parse().map_err(|_| bad())?;
        let sign = if neg { Sign::Minus } else { Sign::Plus };
        Ok(Decimal::new(BigInt::from_biguint(sign, mag), frac.len() as u32))
    }
}

impl PartialOrd for Decimal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Decimal {
    fn cmp(&self, other: &Self) -> Ordering {
        let scale = self.scale.max(other.scale);
        self.rescaled(scale).mantissa.cmp(&other.rescaled(scale).mantissa)
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Natural logarithm of a big integer, good to double precision.
pub fn ln_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Rounds `(num / den)^(1/n)` to `scale` decimals in the given direction.
///
/// With `Rounding::Up` the result is the least `k / 10^scale` satisfying
/// `k^n * den >= num * 10^(scale*n)`; with `Rounding::Down` the greatest
/// satisfying `<=`. Both are decided by exact integer comparison.
pub fn nth_root_ratio(num: &BigUint, den: &BigUint, n: u32, scale: u32, rounding: Rounding) -> Decimal {
    assert!(n >= 1, "root index must be positive");
    assert!(!den.is_zero(), "zero denominator");
    let target = num * pow10(scale * n);
    // cmp(k) compares k^n * den with target.
    let cmp = |k: &BigUint| (k.pow(n) * den).cmp(&target);

    let estimate = if num.is_zero() {
        0.0
    } else {
        ((ln_biguint(num) - ln_biguint(den)) / n as f64 + scale as f64 * std::f64::consts::LN_10).exp()
    };
    let guess = if estimate.is_finite() && estimate >= 0.0 {
        BigUint::from(estimate.floor() as u128)
    } else {
        BigUint::zero()
    };

    // Bracket lo (cmp <= Equal) and hi (cmp >= Equal) by galloping outwards.
    let mut step = BigUint::one();
    let mut lo = guess.clone();
    while !lo.is_zero() && cmp(&lo) == Ordering::Greater {
        lo = if lo > step { &lo - &step } else { BigUint::zero() };
        step <<= 1;
    }
    let mut step = BigUint::one();
    let mut hi = guess.max(lo.clone());
    while cmp(&hi) == Ordering::Less {
        hi += &step;
        step <<= 1;
    }
    // Invariant: cmp(lo) <= Equal or lo == 0, cmp(hi) >= Equal.
    while &hi - &lo > BigUint::one() {
        let mid = (&lo + &hi) >> 1;
        match cmp(&mid) {
            Ordering::Less => lo = mid,
            Ordering::Greater => hi = mid,
            Ordering::Equal => {
                lo = mid.clone();
                hi = mid;
            }
        }
    }
    let k = match rounding {
        Rounding::Up => {
            if cmp(&lo) != Ordering::Less {
                lo
            } else {
                hi
            }
        }
        Rounding::Down => {
            if cmp(&hi) != Ordering::Greater {
                hi
            } else {
                lo
            }
        }
    };
    Decimal::new(BigInt::from(k), scale)
}

/// `nth_root_ratio` for an integer radicand.
pub fn nth_root(value: &BigUint, n: u32, scale: u32, rounding: Rounding) -> Decimal {
    nth_root_ratio(value, &BigUint::one(), n, scale, rounding)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(d("1.60574").to_string(), "1.60574");
        assert_eq!(d("0.00012").to_string(), "0.00012");
        assert_eq!(d("-3.5").to_string(), "-3.5");
        assert_eq!(d("42").to_string(), "42");
        assert!("1.2.3".parse::<Decimal>().is_err());
        assert!("".parse::<Decimal>().is_err());
        assert!(d("1.5") < d("1.50001"));
        assert_eq!(d("1.5").cmp(&d("1.50000")), Ordering::Equal);
    }

    #[test]
    fn roots_round_in_the_requested_direction() {
        let c12 = BigUint::from(460u32);
        assert_eq!(nth_root(&c12, 12, 5, Rounding::Up).to_string(), "1.66685");
        assert_eq!(nth_root(&c12, 12, 5, Rounding::Down).to_string(), "1.66684");
        let two = BigUint::from(2u32);
        assert_eq!(nth_root(&two, 1, 5, Rounding::Up).to_string(), "2.00000");
        assert_eq!(nth_root(&two, 1, 5, Rounding::Down).to_string(), "2.00000");
        // Perfect powers are hit exactly from both sides.
        let v = BigUint::from(15u32).pow(7u32);
        assert_eq!(nth_root(&v, 7, 0, Rounding::Up).to_string(), "15");
        assert_eq!(nth_root(&v, 7, 0, Rounding::Down).to_string(), "15");
    }

    #[test]
    fn fourth_power_from_rounded_bound() {
        assert_eq!(d("1.60574").fourth_power_minus_one(4, Rounding::Up).to_string(), "5.6482");
        assert_eq!(d("1.55701").fourth_power_minus_one(4, Rounding::Down).to_string(), "4.8771");
        assert_eq!(d("1.58746").fourth_power_minus_one(4, Rounding::Up).to_string(), "5.3506");
    }

    proptest! {
        #[test]
        fn root_brackets_the_true_value(v in 1u64..u64::MAX, n in 1u32..40, scale in 0u32..8) {
            let big = BigUint::from(v);
            let up = nth_root(&big, n, scale, Rounding::Up);
            let down = nth_root(&big, n, scale, Rounding::Down);
            let p = BigUint::from(10u32).pow(scale * n);
            let up_m = up.mantissa().magnitude().clone();
            let down_m = down.mantissa().magnitude().clone();
            prop_assert!(up_m.clone().pow(n) >= &big * &p);
            prop_assert!(down_m.clone().pow(n) <= &big * &p);
            prop_assert!(&up_m - &down_m <= BigUint::one());
        }
    }
}
