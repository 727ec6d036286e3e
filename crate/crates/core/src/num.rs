//! Exact numerics: dyadic rationals, rationals with a `num/den` text form,
//! and intervals with rational endpoints for quantities involving logarithms.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bits::BitString;
use crate::error::{Error, Result};

pub type Rational = BigRational;

/// `n/d` as an exact rational. Panics when `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// 2^e for any integer exponent.
pub fn pow2(e: i64) -> Rational {
    if e >= 0 {
        Rational::from_integer(BigInt::one() << e as usize)
    } else {
        Rational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

/// Renders a rational as `num/den` in lowest terms, denominator always shown.
pub fn fmt_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `num/den` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("malformed rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapters keeping rationals exact as `"num/den"` strings.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
            v.iter().map(fmt_rational).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
                .collect()
        }
    }

    pub mod matrix {
        use super::*;

        pub fn serialize<S: Serializer>(m: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
            m.iter()
                .map(|row| row.iter().map(fmt_rational).collect::<Vec<_>>())
                .collect::<Vec<_>>()
                .serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<Vec<Rational>>, D::Error> {
            Vec::<Vec<String>>::deserialize(d)?
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
                        .collect()
                })
                .collect()
        }
    }

    pub mod bitmap {
        use super::*;

        pub fn serialize<S: Serializer>(
            m: &BTreeMap<BitString, Rational>,
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            m.iter()
                .map(|(k, v)| (k.to_string(), fmt_rational(v)))
                .collect::<BTreeMap<_, _>>()
                .serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<BTreeMap<BitString, Rational>, D::Error> {
            BTreeMap::<String, String>::deserialize(d)?
                .iter()
                .map(|(k, v)| {
                    let key = k.parse().map_err(serde::de::Error::custom)?;
                    let val = parse_rational(v).map_err(serde::de::Error::custom)?;
                    Ok((key, val))
                })
                .collect()
        }
    }
}

/// An exact nonnegative dyadic rational `m / 2^e`.
///
/// Kept normalized: the mantissa is odd unless the exponent is zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: BigUint,
    exponent: u64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Self { mantissa: BigUint::zero(), exponent: 0 }
    }

    pub fn one() -> Self {
        Self { mantissa: BigUint::one(), exponent: 0 }
    }

    pub fn new(mantissa: BigUint, exponent: u64) -> Self {
        let mut d = Self { mantissa, exponent };
        d.normalize();
        d
    }

    /// 2^(−k).
    pub fn pow2_neg(k: u64) -> Self {
        Self { mantissa: BigUint::one(), exponent: k }
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(BigInt::from(self.mantissa.clone()), BigInt::one() << self.exponent as usize)
    }

    /// Exact conversion when `q` is a nonnegative dyadic rational.
    pub fn from_rational(q: &Rational) -> Option<Self> {
        if q.is_negative() {
            return None;
        }
        let den = q.denom().to_biguint()?;
        if den.count_ones() != 1 {
            return None;
        }
        let exponent = den.bits() - 1;
        Some(Self::new(q.numer().to_biguint()?, exponent))
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.to_rational())
    }

    fn normalize(&mut self) {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return;
        }
        let tz = self.mantissa.trailing_zeros().unwrap_or(0).min(self.exponent);
        if tz > 0 {
            self.mantissa >>= tz as usize;
            self.exponent -= tz;
        }
    }

    fn aligned(&self, other: &Self) -> (BigUint, BigUint, u64) {
        let e = self.exponent.max(other.exponent);
        let a = &self.mantissa << (e - self.exponent) as usize;
        let b = &other.mantissa << (e - other.exponent) as usize;
        (a, b, e)
    }

    /// `self − other`, or `None` if the result would be negative.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let (a, b, e) = self.aligned(other);
        (a >= b).then(|| Self::new(a - b, e))
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(rhs);
        Dyadic::new(a + b, e)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;

    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mantissa * &rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, x| &acc + &x)
    }
}

impl<'a> Sum<&'a Dyadic> for Dyadic {
    fn sum<I: Iterator<Item = &'a Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, x| &acc + x)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.mantissa, self.exponent)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed dyadic {s:?}, expected m/2^e"));
        let s = s.trim();
        match s.split_once("/2^") {
            Some((m, e)) => Ok(Dyadic::new(
                m.parse().map_err(|_| bad())?,
                e.parse().map_err(|_| bad())?,
            )),
            None => Ok(Dyadic::new(s.parse().map_err(|_| bad())?, 0)),
        }
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A closed interval `[lo, hi]` with exact rational endpoints.
///
/// Only logarithms introduce approximation; every other operation on
/// intervals is exact, so an enclosure stays an enclosure.
#[derive(Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi, "empty interval");
        Self { lo, hi }
    }

    pub fn point(q: Rational) -> Self {
        Self { lo: q.clone(), hi: q }
    }

    pub fn zero() -> Self {
        Self::point(Rational::zero())
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    /// Every point of the interval is `< q`.
    pub fn strictly_below(&self, q: &Rational) -> bool {
        &self.hi < q
    }

    /// Every point of the interval is `> q`.
    pub fn strictly_above(&self, q: &Rational) -> bool {
        &self.lo > q
    }

    pub fn scale(&self, k: &Rational) -> Interval {
        let (a, b) = (&self.lo * k, &self.hi * k);
        if k.is_negative() {
            Interval::new(b, a)
        } else {
            Interval::new(a, b)
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let products = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = products.iter().min().unwrap().clone();
        let hi = products.iter().max().unwrap().clone();
        Interval::new(lo, hi)
    }

    /// Reciprocal of a strictly positive interval.
    pub fn recip(&self) -> Interval {
        assert!(self.lo.is_positive(), "reciprocal of a non-positive interval");
        Interval::new(self.hi.recip(), self.lo.recip())
    }

    /// Pointwise maximum: encloses `max(a, b)` for `a ∈ self`, `b ∈ other`.
    pub fn max(&self, other: &Interval) -> Interval {
        Interval::new(
            (&self.lo).max(&other.lo).clone(),
            (&self.hi).max(&other.hi).clone(),
        )
    }

    /// Encloses `log₂ x` for every `x` in a strictly positive interval, each
    /// endpoint accurate to `2^(−bits)`.
    pub fn log2(&self, bits: u32) -> Interval {
        let lo = log2_bounds(&self.lo, bits).lo;
        let hi = log2_bounds(&self.hi, bits).hi;
        Interval::new(lo, hi)
    }

    /// Widens the endpoints outward to multiples of `2^(−bits)`, bounding the
    /// size of the rationals carried through long sums.
    pub fn round_out(&self, bits: u32) -> Interval {
        let scale = BigInt::one() << bits as usize;
        let lo = (&self.lo * &scale).floor() / &scale;
        let hi = (&self.hi * &scale).ceil() / &scale;
        Interval::new(lo, hi)
    }

    pub fn midpoint_f64(&self) -> f64 {
        (to_f64(&self.lo) + to_f64(&self.hi)) / 2.0
    }
}

impl Add for &Interval {
    type Output = Interval;

    fn add(self, rhs: &Interval) -> Interval {
        Interval::new(&self.lo + &rhs.lo, &self.hi + &rhs.hi)
    }
}

impl Sub for &Interval {
    type Output = Interval;

    fn sub(self, rhs: &Interval) -> Interval {
        Interval::new(&self.lo - &rhs.hi, &self.hi - &rhs.lo)
    }
}

impl Neg for &Interval {
    type Output = Interval;

    fn neg(self) -> Interval {
        Interval::new(-&self.hi, -&self.lo)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12}, {:.12}]", to_f64(&self.lo), to_f64(&self.hi))
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", fmt_rational(&self.lo), fmt_rational(&self.hi))
    }
}

/// Encloses `log₂ q` for a positive rational `q` in an interval of width at
/// most `2^(1−bits)`; exact when `q` is a power of two.
///
/// Digit-by-digit squaring on a fixed-point mantissa, run twice: once with
/// every rounding downward (the lower bound) and once upward (the upper).
pub fn log2_bounds(q: &Rational, bits: u32) -> Interval {
    assert!(q.is_positive(), "log2 of a non-positive rational");
    let n = q.numer().magnitude().clone();
    let d = q.denom().magnitude().clone();
    let mut e = n.bits() as i64 - d.bits() as i64;
    let (mut yn, yd) = if e >= 0 { (n, d << e as usize) } else { (n << (-e) as usize, d) };
    if yn < yd {
        e -= 1;
        yn <<= 1;
    }
    // 1 ≤ yn/yd < 2
    if yn == yd {
        return Interval::point(int(e));
    }
    let w = 2 * bits as usize + 16;
    let one = BigUint::one() << w;
    let two = &one << 1;
    let scaled = &yn << w;
    let (mut lo, rem) = scaled.div_rem(&yd);
    let mut hi = if rem.is_zero() { lo.clone() } else { &lo + 1u32 };
    let mut lo_digits = BigUint::zero();
    let mut hi_digits = BigUint::zero();
    for _ in 0..bits {
        lo = (&lo * &lo) >> w;
        lo_digits <<= 1;
        if lo >= two {
            lo_digits += 1u32;
            lo >>= 1;
        }
        hi = ceil_shr(&hi * &hi, w);
        hi_digits <<= 1;
        if hi >= two {
            hi_digits += 1u32;
            hi = ceil_shr(hi, 1);
        }
    }
    let denom = BigInt::one() << bits as usize;
    let lo = int(e) + Rational::new(BigInt::from(lo_digits), denom.clone());
    let hi = int(e) + Rational::new(BigInt::from(hi_digits) + 1, denom);
    Interval::new(lo, hi)
}

fn ceil_shr(x: BigUint, shift: usize) -> BigUint {
    let floor = &x >> shift;
    if (&floor << shift) == x {
        floor
    } else {
        floor + 1u32
    }
}

/// `−q·log₂ q` with the convention `0·log 0 = 0`.
pub fn neg_xlog2x(q: &Rational, bits: u32) -> Interval {
    if q.is_zero() {
        return Interval::zero();
    }
    (-&log2_bounds(q, bits)).scale(q)
}

/// Three-way outcome of comparing an enclosure against an exact value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Below,
    Above,
    Undecided,
}

/// Recomputes `f(bits)` at increasing precision until the enclosure lies
/// strictly on one side of `target`, giving up at `max_bits`.
pub fn decide_side(
    target: &Rational,
    start_bits: u32,
    max_bits: u32,
    f: impl Fn(u32) -> Interval,
) -> (Side, Interval) {
    let mut bits = start_bits.max(1);
    loop {
        let iv = f(bits);
        if iv.strictly_below(target) {
            return (Side::Below, iv);
        }
        if iv.strictly_above(target) {
            return (Side::Above, iv);
        }
        if bits >= max_bits {
            return (Side::Undecided, iv);
        }
        bits = (bits * 2).min(max_bits);
    }
}
