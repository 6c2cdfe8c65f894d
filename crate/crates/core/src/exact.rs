//! Exact rational helpers shared by every module.
//!
//! Rates, probabilities and bounds are all carried as [`Rational`]; the few
//! transcendental quantities that show up (square roots, `2^x` for rational
//! `x`, `e^-x`) are replaced by rational bounds whose direction is part of
//! the function's contract.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed rational {input:?}: expected `p/q` or an integer")]
pub struct ParseRationalError {
    pub input: String,
}

/// Parses `p/q` or `p`. Decimal notation is rejected so that a rate never
/// silently loses precision on its way in.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError { input: s.to_string() };
    let t = s.trim();
    if t.is_empty() || !t.chars().all(|c| c.is_ascii_digit() || c == '/' || c == '-') {
        return Err(err());
    }
    let r = Rational::from_str(t).map_err(|_| err())?;
    Ok(r)
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(v: impl Into<BigInt>) -> Rational {
    Rational::from_integer(v.into())
}

/// `2^e` for any integer exponent.
pub fn pow2(e: i64) -> Rational {
    let m = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Rational::from_integer(m)
    } else {
        Rational::new(BigInt::one(), m)
    }
}

pub fn floor(r: &Rational) -> BigInt {
    r.floor().to_integer()
}

pub fn ceil(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

/// `⌊2^r⌋`, computed as an integer root so that it is exact for every rational `r`.
pub fn floor_pow2(r: &Rational) -> BigUint {
    let (p, q) = (r.numer(), r.denom());
    if p.is_negative() {
        return BigUint::zero();
    }
    let q = q.to_u32().expect("exponent denominator too large");
    let shift = p.to_u64().expect("exponent too large");
    (BigUint::one() << shift).nth_root(q)
}

/// `⌈2^r⌉`.
pub fn ceil_pow2(r: &Rational) -> BigUint {
    let (p, q) = (r.numer(), r.denom());
    if p.is_negative() {
        return BigUint::one();
    }
    let qq = q.to_u32().expect("exponent denominator too large");
    let shift = p.to_u64().expect("exponent too large");
    let power = BigUint::one() << shift;
    let root = power.nth_root(qq);
    if root.pow(qq) == power {
        root
    } else {
        root + 1u32
    }
}

/// Least rational with denominator at most `10^6` that is `>= sqrt(n)`.
///
/// Perfect squares come back exact. Otherwise this is the upper endpoint of
/// the Stern-Brocot bracket around `sqrt(n)` once mediants exceed the
/// denominator bound; the walk moves in batched runs so it needs only a
/// logarithmic number of rounds.
pub fn sqrt_upper(n: u64) -> Rational {
    const MAX_DEN: u128 = 1_000_000;
    let r = n.isqrt() as u128;
    let n = n as u128;
    if r * r == n {
        return int(BigInt::from(r));
    }
    let below = |p: u128, q: u128| p * p < n * q * q;
    let (mut a, mut b, mut c, mut d) = (r, 1u128, r + 1, 1u128);
    while b + d <= MAX_DEN {
        if below(a + c, b + d) {
            let t = longest_run(|t| b + t * d <= MAX_DEN && below(a + t * c, b + t * d));
            a += t * c;
            b += t * d;
        } else {
            let t = longest_run(|t| d + t * b <= MAX_DEN && !below(c + t * a, d + t * b));
            c += t * a;
            d += t * b;
        }
    }
    Rational::new(BigInt::from(c), BigInt::from(d))
}

/// Largest `t >= 1` with `ok(t)`, given `ok(1)` and monotonicity.
fn longest_run(ok: impl Fn(u128) -> bool) -> u128 {
    let mut hi = 2u128;
    while ok(hi) {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

const TAYLOR_TERMS: u32 = 24;

/// Taylor partial sum of `e^x`; a lower bound for `x >= 0`.
fn exp_lower(x: &Rational) -> Rational {
    let mut term = Rational::one();
    let mut sum = Rational::one();
    for j in 1..=TAYLOR_TERMS {
        term = term * x / int(j);
        sum += &term;
    }
    sum
}

/// A rational upper bound on `e^{-x}` for `x >= 0`.
pub fn exp_neg_upper(x: &Rational) -> Rational {
    assert!(!x.is_negative(), "exp_neg_upper needs x >= 0");
    if x.is_zero() {
        return Rational::one();
    }
    let whole = floor(x);
    match whole.to_u32() {
        Some(a) if a <= 4096 => {
            let frac = x - Rational::from_integer(whole.clone());
            let e_lower = exp_lower(&Rational::one());
            let head = (Rational::one() / e_lower).pow(a as i32);
            head / exp_lower(&frac)
        }
        // log2(e) > 1.4426950, so e^{-x} <= 2^{-floor(1.4426950 x)}.
        _ => {
            let y = floor(&(x * ratio(14_426_950, 10_000_000)));
            pow2(-y.to_i64().unwrap_or(i64::MAX))
        }
    }
}

/// A rational upper bound on `2^{-y}` for `y >= 0`; exact when `y` is an integer.
pub fn pow2_neg_upper(y: &Rational) -> Rational {
    assert!(!y.is_negative(), "pow2_neg_upper needs y >= 0");
    let whole = floor(y);
    let frac = y - Rational::from_integer(whole.clone());
    let head = pow2(-whole.to_i64().expect("exponent too large"));
    if frac.is_zero() {
        return head;
    }
    let ln2_lower = Rational::new(
        BigInt::from(693_147_180_559_945u64),
        BigInt::from(1_000_000_000_000_000u64),
    );
    head / exp_lower(&(frac * ln2_lower))
}

/// Renders `r` in plain decimal notation rounded (half away from zero) to
/// `sig` significant digits, trailing zeros trimmed.
pub fn to_decimal(r: &Rational, sig: usize) -> String {
    assert!(sig >= 1);
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let x = r.abs();
    let ten = BigInt::from(10);
    let pow10 = |e: i64| -> Rational {
        let m = num_traits::pow(ten.clone(), e.unsigned_abs() as usize);
        if e >= 0 {
            Rational::from_integer(m)
        } else {
            Rational::new(BigInt::one(), m)
        }
    };
    let mut e = x.numer().to_string().len() as i64 - x.denom().to_string().len() as i64;
    while x < pow10(e) {
        e -= 1;
    }
    while x >= pow10(e + 1) {
        e += 1;
    }
    let scaled = &x * pow10(sig as i64 - 1 - e);
    let (q, rem) = scaled.numer().div_rem(scaled.denom());
    let mut digits = if rem * 2 >= *scaled.denom() { q + 1 } else { q };
    if digits.to_string().len() > sig {
        digits /= 10;
        e += 1;
    }
    let s = digits.to_string();
    // value = s * 10^(e - sig + 1)
    let point = e + 1; // digits before the decimal point
    let mut out = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), s)
    } else if point as usize >= s.len() {
        format!("{}{}", s, "0".repeat(point as usize - s.len()))
    } else {
        format!("{}.{}", &s[..point as usize], &s[point as usize..])
    };
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    if neg {
        out.insert(0, '-');
    }
    out
}

/// `Display` adaptor printing a rational as `p/q` (or `p` when integral).
pub struct Fraction<'a>(pub &'a Rational);

impl fmt::Display for Fraction<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

pub fn to_biguint(v: &BigInt) -> Option<BigUint> {
    match v.sign() {
        Sign::Minus => None,
        _ => Some(v.magnitude().clone()),
    }
}

/// Serde adaptor storing a [`Rational`] as a `"p/q"` string.
pub mod serde_fraction {
    use super::{parse_rational, Fraction, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&Fraction(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_rejects_decimals() {
        assert_eq!(parse_rational("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("4/6").unwrap(), ratio(2, 3));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("a/b").is_err());
    }

    #[test]
    fn pow2_floor_and_ceil() {
        assert_eq!(floor_pow2(&int(2)), BigUint::from(4u32));
        // 2^{3/2} = 2.828...
        assert_eq!(floor_pow2(&ratio(3, 2)), BigUint::from(2u32));
        assert_eq!(ceil_pow2(&ratio(3, 2)), BigUint::from(3u32));
        assert_eq!(ceil_pow2(&int(5)), BigUint::from(32u32));
        assert_eq!(floor_pow2(&ratio(-1, 2)), BigUint::zero());
        assert_eq!(ceil_pow2(&ratio(-1, 2)), BigUint::one());
        assert_eq!(pow2(-3), ratio(1, 8));
    }

    #[test]
    fn sqrt_upper_is_tight_upper_bound() {
        assert_eq!(sqrt_upper(100), int(10));
        assert_eq!(sqrt_upper(0), int(0));
        for n in [2u64, 3, 5, 99, 101, 12345, (1 << 41) + 1] {
            let s = sqrt_upper(n);
            assert!(&s * &s > int(n), "{n}");
            assert!(s.denom() <= &BigInt::from(1_000_000));
            // within 10^-6 of the true root, far tighter than the required 1
            let lower = &s - ratio(1, 1_000_000);
            assert!(&lower * &lower < int(n) || lower.is_negative());
        }
    }

    #[test]
    fn sqrt_upper_matches_brute_force_for_small_denominators() {
        // brute force over all denominators up to the bound is too slow, but
        // the best upper approximation with denominator <= 10^6 must beat
        // ceil(q sqrt n)/q for every q in a sample
        let n = 7u64;
        let s = sqrt_upper(n);
        for q in 1u64..5000 {
            let p = ((n * q * q) as f64).sqrt().ceil() as u64;
            let mut p = p;
            while p * p < n * q * q {
                p += 1;
            }
            while (p - 1) * (p - 1) >= n * q * q {
                p -= 1;
            }
            assert!(s <= ratio(p as i64, q as i64));
        }
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&ratio(2, 3), 12), "0.666666666667");
        assert_eq!(to_decimal(&ratio(1, 2), 12), "0.5");
        assert_eq!(to_decimal(&int(1), 12), "1");
        assert_eq!(to_decimal(&int(0), 12), "0");
        assert_eq!(to_decimal(&ratio(100, 199), 12), "0.502512562814");
        assert_eq!(to_decimal(&ratio(1, 3000), 3), "0.000333");
        assert_eq!(to_decimal(&ratio(9999, 10), 3), "1000");
        assert_eq!(to_decimal(&ratio(-5, 4), 12), "-1.25");
    }

    #[test]
    fn exponential_bounds() {
        assert_eq!(pow2_neg_upper(&int(60)), pow2(-60));
        assert_eq!(exp_neg_upper(&int(0)), int(1));
        // e^-1 = 0.36787944117...
        let b = exp_neg_upper(&int(1));
        assert!(b > ratio(367_879_441, 1_000_000_000));
        assert!(b < ratio(367_879_442, 1_000_000_000));
        // 2^-0.5 = 0.70710678118...
        let h = pow2_neg_upper(&ratio(1, 2));
        assert!(h > ratio(707_106_781, 1_000_000_000));
        assert!(h < ratio(707_106_782, 1_000_000_000));
        let big = exp_neg_upper(&int(10_000));
        assert!(big > int(0) && big < pow2(-14_000));
    }
}
