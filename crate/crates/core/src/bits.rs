//! Finite binary strings.
//!
//! [`BitString`] is the common currency of the crate: programs, codewords,
//! machine outputs and conditions are all bit strings. The textual form is an
//! ASCII string of `0`/`1`, with the empty string standing for Λ.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite sequence of bits with explicit length.
///
/// Ordering is lexicographic with a proper prefix sorting before its
/// extensions, which is the order used for codeword comparisons.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    /// The empty string Λ.
    pub fn empty() -> Self {
        Self { bits: Vec::new() }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// The `len`-bit big-endian rendering of `value`. Bits of `value` above
    /// `len` are ignored.
    pub fn from_index(value: u64, len: usize) -> Self {
        let bits = (0..len)
            .rev()
            .map(|i| i < 64 && (value >> i) & 1 == 1)
            .collect();
        Self { bits }
    }

    /// All strings of length `len` in lexicographic order.
    pub fn all_of_length(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < 64, "refusing to iterate 2^{len} strings");
        (0..1u64 << len).map(move |v| BitString::from_index(v, len))
    }

    /// All strings of length at most `max_len`, shortest first.
    pub fn all_up_to(max_len: usize) -> impl Iterator<Item = BitString> {
        (0..=max_len).flat_map(BitString::all_of_length)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.bits.get(i).copied()
    }

    pub fn last(&self) -> Option<bool> {
        self.bits.last().copied()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.extend_from(other);
        out
    }

    /// `self` followed by a single bit.
    pub fn child(&self, bit: bool) -> BitString {
        let mut out = self.clone();
        out.push(bit);
        out
    }

    /// The first `len` bits. Panics if `len > self.len()`.
    pub fn prefix(&self, len: usize) -> BitString {
        Self { bits: self.bits[..len].to_vec() }
    }

    pub fn suffix_from(&self, start: usize) -> BitString {
        Self { bits: self.bits[start..].to_vec() }
    }

    /// `self ⊑ other`, including equality.
    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        other.bits.starts_with(&self.bits)
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Big-endian value of the bits; `None` if it does not fit in 64 bits.
    pub fn to_u64(&self) -> Option<u64> {
        let significant = self.bits.iter().skip_while(|&&b| !b).count();
        if significant > 64 {
            return None;
        }
        Some(self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
    }

    /// Index of this string in the shortlex enumeration Λ, 0, 1, 00, 01, ...
    pub fn shortlex_index(&self) -> u64 {
        (1u64 << self.len()) - 1 + self.to_u64().expect("string too long")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("unexpected character {other:?} in bit string"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString::from_bits)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
        f.pad(&s)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("Λ")
        } else {
            write!(f, "\"{self}\"")
        }
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shorthand for parsing a literal in tests and examples.
///
/// Panics on characters other than `0` and `1`.
pub fn bs(s: &str) -> BitString {
    s.parse().expect("bit string literal")
}
