//! Self-delimiting framings of strings and numbers.

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Binary notation of `n` without leading zeros; `beta(0)` is `"0"`.
pub fn beta(n: u64) -> BitString {
    if n == 0 {
        return BitString::from_bits(vec![false]);
    }
    let len = 64 - n.leading_zeros() as usize;
    BitString::from_index(n, len)
}

/// Inverse of [`beta`]; rejects non-canonical notations such as `"01"`.
pub fn parse_beta(x: &BitString) -> Result<u64> {
    if x.is_empty() || (x.len() > 1 && x.get(0) == Some(false)) {
        return Err(Error::Decode(format!("{x:?} is not a canonical binary numeral")));
    }
    x.to_u64().ok_or_else(|| Error::Decode(format!("numeral {x} does not fit in 64 bits")))
}

/// `x(1)0 x(2)0 … x(n)1`: every bit is followed by a flag, set only after the
/// last one. Undefined on the empty string.
pub fn pad_terminate(x: &BitString) -> Result<BitString> {
    if x.is_empty() {
        return Err(Error::Domain("pad_terminate is undefined on the empty string".into()));
    }
    let n = x.len();
    let bits = x
        .bits()
        .iter()
        .enumerate()
        .flat_map(|(i, &b)| [b, i + 1 == n])
        .collect();
    Ok(BitString::from_bits(bits))
}

/// Splits `p` into `(head, rest)` with `pad_terminate(head) ++ rest == p`.
pub fn parse_pad_terminated(p: &BitString) -> Result<(BitString, BitString)> {
    let bits = p.bits();
    let mut head = BitString::empty();
    let mut i = 0;
    while i + 1 < bits.len() {
        head.push(bits[i]);
        if bits[i + 1] {
            return Ok((head, p.suffix_from(i + 2)));
        }
        i += 2;
    }
    Err(Error::Decode(format!("no terminating pair in {p:?}")))
}

/// `110 x(1)0 x(2)0 … x(n)0 11`, of length `2|x| + 5`.
pub fn wrap(x: &BitString) -> BitString {
    let mut out = BitString::from_bits(vec![true, true, false]);
    for &b in x.bits() {
        out.push(b);
        out.push(false);
    }
    out.push(true);
    out.push(true);
    out
}

/// `pad_terminate(beta(|x|)) ++ x`: the codeword announces its own length.
pub fn length_prefix(x: &BitString) -> BitString {
    let mut out = pad_terminate(&beta(x.len() as u64)).expect("beta is never empty");
    out.extend_from(x);
    out
}

/// [`length_prefix`] applied to `beta(n)`.
pub fn length_prefix_nat(n: u64) -> BitString {
    length_prefix(&beta(n))
}

/// Reads one [`length_prefix`] frame off the front of `p`.
pub fn parse_length_prefixed(p: &BitString) -> Result<(BitString, BitString)> {
    let (len_bits, rest) = parse_pad_terminated(p)?;
    let len = parse_beta(&len_bits)? as usize;
    if rest.len() < len {
        return Err(Error::Decode(format!(
            "frame announces {len} bits but only {} remain",
            rest.len()
        )));
    }
    Ok((rest.prefix(len), rest.suffix_from(len)))
}

pub fn parse_length_prefixed_nat(p: &BitString) -> Result<(u64, BitString)> {
    let (x, rest) = parse_length_prefixed(p)?;
    Ok((parse_beta(&x)?, rest))
}

/// The element count framed first, then every element framed.
pub fn tuple_encode(xs: &[BitString]) -> BitString {
    let mut out = length_prefix_nat(xs.len() as u64);
    for x in xs {
        out.extend_from(&length_prefix(x));
    }
    out
}

/// Reads one tuple off the front of `p`, returning the remainder.
pub fn tuple_decode_prefix(p: &BitString) -> Result<(Vec<BitString>, BitString)> {
    let (k, mut rest) = parse_length_prefixed_nat(p)?;
    let mut items = Vec::new();
    for _ in 0..k {
        let (x, r) = parse_length_prefixed(&rest)?;
        items.push(x);
        rest = r;
    }
    Ok((items, rest))
}

/// Inverse of [`tuple_encode`]; trailing bits are an error.
pub fn tuple_decode(p: &BitString) -> Result<Vec<BitString>> {
    let (items, rest) = tuple_decode_prefix(p)?;
    if !rest.is_empty() {
        return Err(Error::Decode(format!("{} trailing bits after tuple", rest.len())));
    }
    Ok(items)
}
