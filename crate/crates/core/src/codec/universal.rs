//! Universal integer codes, pairing, base conversion and the `log*` series.

use num_bigint::{BigInt, BigUint};
use num_integer::Roots;
use num_traits::{One, Zero};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::num::{int, log2_bounds, Interval, Rational};

/// Elias δ code of `n ≥ 1`: `⌊log N⌋` zeros, then `N = ⌊log n⌋ + 1` in
/// binary, then `n` without its leading one.
pub fn elias_delta(n: u64) -> Result<BitString> {
    if n == 0 {
        return Err(Error::Domain("Elias delta code is defined for n >= 1".into()));
    }
    let n_bits = 64 - n.leading_zeros() as u64;
    let len_of_len = 63 - n_bits.leading_zeros() as usize;
    let mut out = BitString::from_bits(vec![false; len_of_len]);
    out.extend_from(&BitString::from_index(n_bits, len_of_len + 1));
    out.extend_from(&BitString::from_index(n, n_bits as usize - 1));
    Ok(out)
}

/// Reads one δ codeword off the front of `p`.
pub fn elias_delta_decode(p: &BitString) -> Result<(u64, BitString)> {
    let bits = p.bits();
    let zeros = bits.iter().take_while(|&&b| !b).count();
    let err = || Error::Decode(format!("truncated or oversized Elias delta codeword in {p:?}"));
    if zeros > 6 || bits.len() < 2 * zeros + 1 {
        return Err(err());
    }
    let n_bits = p.prefix(2 * zeros + 1).suffix_from(zeros).to_u64().ok_or_else(err)?;
    let start = 2 * zeros + 1;
    let end = start + n_bits as usize - 1;
    if n_bits > 64 || bits.len() < end {
        return Err(err());
    }
    let low = if n_bits > 1 { p.prefix(end).suffix_from(start).to_u64().ok_or_else(err)? } else { 0 };
    let n = if n_bits == 64 { (1u64 << 63) | low } else { (1u64 << (n_bits - 1)) | low };
    Ok((n, p.suffix_from(end)))
}

/// `u + 2·log₂ u` for `u ≥ 1`.
pub fn j_cost(u: f64) -> Result<f64> {
    if !(u >= 1.0) {
        return Err(Error::Domain(format!("J(u) needs u >= 1, got {u}")));
    }
    Ok(u + 2.0 * u.log2())
}

/// Cantor pairing `(i+j)(i+j+1)/2 + j`.
pub fn pair(i: u64, j: u64) -> u128 {
    let s = i as u128 + j as u128;
    s * (s + 1) / 2 + j as u128
}

/// Inverse of [`pair`].
pub fn unpair(k: u128) -> (u64, u64) {
    // largest s with s(s+1)/2 <= k
    let mut s = ((8 * k + 1).sqrt() - 1) / 2;
    while s * (s + 1) / 2 > k {
        s -= 1;
    }
    while (s + 1) * (s + 2) / 2 <= k {
        s += 1;
    }
    let j = k - s * (s + 1) / 2;
    ((s - j) as u64, j as u64)
}

/// Converts a base-`r` string into the base-`s` string naming the leftmost
/// largest `s`-ary interval inside the `r`-ary interval of `x`.
pub fn cnv(r: u32, s: u32, x: &[u32]) -> Result<Vec<u32>> {
    if r < 2 || s < 2 {
        return Err(Error::Domain(format!("bases must be at least 2, got r={r} s={s}")));
    }
    if let Some(d) = x.iter().find(|&&d| d >= r) {
        return Err(Error::Domain(format!("digit {d} is invalid in base {r}")));
    }
    if let Some(a) = x.iter().try_fold(0u64, |acc, &d| acc.checked_mul(r as u64)?.checked_add(d as u64)) {
        if let Some((j, m)) = cnv_small(r, s, a, x.len() as u32) {
            return Ok(to_digits(BigUint::from(j), &BigUint::from(s), m as usize));
        }
    }
    Ok(cnv_big(r, s, x))
}

fn cnv_big(r: u32, s: u32, x: &[u32]) -> Vec<u32> {
    let r_big = BigUint::from(r);
    let s_big = BigUint::from(s);
    let a = x.iter().fold(BigUint::zero(), |acc, &d| acc * &r_big + d);
    let r_pow = r_big.pow(x.len() as u32);
    let a_next = &a + 1u32;
    let mut s_pow = BigUint::one();
    let mut m = 0usize;
    loop {
        // first grid point j/s^m at or after a/r^n
        let num = &a * &s_pow;
        let mut j = &num / &r_pow;
        if &j * &r_pow != num {
            j += 1u32;
        }
        if (&j + 1u32) * &r_pow <= &a_next * &s_pow {
            return to_digits(j, &s_big, m);
        }
        s_pow *= &s_big;
        m += 1;
    }
}

/// [`cnv`] on the numeric value `a` of a length-`n` base-`r` string, in
/// machine integers: returns `(j, m)` naming the base-`s` string of length `m`
/// with value `j`, or `None` if an intermediate overflows.
pub fn cnv_small(r: u32, s: u32, a: u64, n: u32) -> Option<(u128, u32)> {
    let (r, s, a) = (r as u128, s as u128, a as u128);
    let r_pow = r.checked_pow(n)?;
    // no s-ary interval longer than the r-ary one fits
    let mut s_pow = 1u128;
    let mut m = 0u32;
    while s_pow < r_pow {
        s_pow = s_pow.checked_mul(s)?;
        m += 1;
    }
    loop {
        let num = a.checked_mul(s_pow)?;
        let j = num.div_ceil(r_pow);
        if (j + 1).checked_mul(r_pow)? <= (a + 1).checked_mul(s_pow)? {
            return Some((j, m));
        }
        s_pow = s_pow.checked_mul(s)?;
        m += 1;
    }
}

fn to_digits(mut v: BigUint, base: &BigUint, len: usize) -> Vec<u32> {
    let mut out = vec![0u32; len];
    for slot in out.iter_mut().rev() {
        let d = &v % base;
        *slot = d.to_u32_digits().first().copied().unwrap_or(0);
        v /= base;
    }
    out
}

/// `|z|·log s ≤ |x|·log r + log s`, decided exactly as `s^|z| ≤ s·r^|x|`.
pub fn cnv_length_bound_holds(r: u32, s: u32, x_len: usize, z_len: usize) -> bool {
    BigUint::from(s).pow(z_len as u32) <= BigUint::from(s) * BigUint::from(r).pow(x_len as u32)
}

const TOWERS: [u64; 5] = [1, 2, 4, 16, 65536];

/// Encloses `2^(−log*₂ n)` where `log*₂ n = log n + log log n + …` keeps only
/// the positive terms.
///
/// Since `2^(−log y) = 1/y`, the term is `1/(n · log n · log log n ⋯)` with
/// one factor fewer than there are positive terms. The number of positive
/// terms is exact: iterate `k` applies while `n` exceeds the `k`-th tower of
/// twos.
pub fn log_star_term(n: u64, bits: u32) -> Interval {
    assert!(n >= 1);
    let positive_terms = TOWERS.iter().filter(|&&t| n > t).count();
    let mut denom = Interval::point(int(n as i64));
    let mut iterate = log2_bounds(&int(n as i64), bits);
    for _ in 1..positive_terms {
        denom = denom.mul(&iterate).round_out(4 * bits);
        iterate = iterate.log2(bits);
    }
    denom.recip()
}

/// Running partial sums of `Σ_{n ≤ N} 2^(−log*₂ n)`, each as an enclosure of
/// width well under `2^(−30)` for `N ≤ 10^6`.
pub struct LogStarSums {
    next: u64,
    lo: BigInt,
    hi: BigInt,
}

const LOG_STAR_BITS: u32 = 44;
const LOG_STAR_FIXED: usize = 72;

impl LogStarSums {
    pub fn new() -> Self {
        Self { next: 1, lo: BigInt::zero(), hi: BigInt::zero() }
    }
}

impl Default for LogStarSums {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for LogStarSums {
    type Item = (u64, Interval);

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.next;
        self.next += 1;
        let term = log_star_term(n, LOG_STAR_BITS);
        let scale = Rational::from_integer(BigInt::one() << LOG_STAR_FIXED);
        self.lo += (&term.lo * &scale).floor().to_integer();
        self.hi += (&term.hi * &scale).ceil().to_integer();
        let denom = BigInt::one() << LOG_STAR_FIXED;
        let iv = Interval::new(
            Rational::new(self.lo.clone(), denom.clone()),
            Rational::new(self.hi.clone(), denom),
        );
        Some((n, iv))
    }
}

/// Encloses `Σ_{n ≤ N} 2^(−log*₂ n)`.
pub fn log_star_partial_sum(big_n: u64) -> Result<Interval> {
    if big_n == 0 {
        return Err(Error::Domain("log* partial sum needs N >= 1".into()));
    }
    Ok(LogStarSums::new().nth(big_n as usize - 1).expect("unbounded iterator").1)
}
