//! Prefix-free and universal codes.
//!
//! Codes here are built by the interval method: a binary string `x` names the
//! binary interval `[x] = [0.x, 0.x + 2^(−|x|))` of `[0, 1)`, and disjoint
//! intervals give a prefix-free set of names.

mod framing;
mod universal;

pub use framing::*;
pub use universal::*;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::num::{pow2, Dyadic, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeEntry {
    pub label: String,
    pub codeword: BitString,
}

/// A labeled prefix code. Serializes as a JSON array of `{label, codeword}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<CodeEntry>", into = "Vec<CodeEntry>")]
pub struct CodeBook {
    entries: Vec<CodeEntry>,
}

impl CodeBook {
    /// Validates prefix-freeness; the Kraft sum then cannot exceed 1.
    pub fn new(entries: Vec<CodeEntry>) -> Result<Self> {
        let words: Vec<_> = entries.iter().map(|e| e.codeword.clone()).collect();
        if !prefix_free_check(&words) {
            return Err(Error::Domain("codewords are not prefix-free".into()));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[CodeEntry] {
        &self.entries
    }

    pub fn codewords(&self) -> impl Iterator<Item = &BitString> {
        self.entries.iter().map(|e| &e.codeword)
    }

    pub fn get(&self, label: &str) -> Option<&BitString> {
        self.entries.iter().find(|e| e.label == label).map(|e| &e.codeword)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Decodes one codeword off the front of `stream`.
    pub fn decode_prefix<'a>(&'a self, stream: &BitString) -> Option<(&'a str, BitString)> {
        self.entries
            .iter()
            .find(|e| e.codeword.is_prefix_of(stream))
            .map(|e| (e.label.as_str(), stream.suffix_from(e.codeword.len())))
    }
}

impl TryFrom<Vec<CodeEntry>> for CodeBook {
    type Error = Error;

    fn try_from(entries: Vec<CodeEntry>) -> Result<Self> {
        CodeBook::new(entries)
    }
}

impl From<CodeBook> for Vec<CodeEntry> {
    fn from(cb: CodeBook) -> Self {
        cb.entries
    }
}

/// Positive weights with total at most 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector {
    weights: Vec<Rational>,
}

impl WeightVector {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
            return Err(Error::InvalidWeights(format!("weight {w} is not positive")));
        }
        let total: Rational = weights.iter().sum();
        if total > Rational::one() {
            return Err(Error::InvalidWeights(format!("weights sum to {total} > 1")));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }
}

/// Exact `Σ 2^(−|w|)` over the codewords.
pub fn kraft_sum<'a>(words: impl IntoIterator<Item = &'a BitString>) -> Dyadic {
    words.into_iter().map(|w| Dyadic::pow2_neg(w.len() as u64)).sum()
}

/// True iff no word is a prefix of another. Duplicates count as violations.
pub fn prefix_free_check(words: &[BitString]) -> bool {
    // in lexicographic order a word's extensions follow it directly
    let mut sorted: Vec<&BitString> = words.iter().collect();
    sorted.sort();
    sorted.windows(2).all(|w| !w[0].is_prefix_of(w[1]))
}

/// A prefix code with exactly the given codeword lengths.
///
/// Lengths are sorted nondecreasing and adjacent intervals are chopped from
/// the left of `[0, 1)`; each is then binary, and the codewords are returned
/// in the original order. Labels are the input positions.
pub fn kraft_construct(lengths: &[usize]) -> Result<CodeBook> {
    let sum: Dyadic = lengths.iter().map(|&l| Dyadic::pow2_neg(l as u64)).sum();
    if sum > Dyadic::one() {
        return Err(Error::KraftExceeded { sum });
    }
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by_key(|&i| lengths[i]);

    let mut words = vec![BitString::empty(); lengths.len()];
    // left endpoint, as an integer count of units 2^(−current length)
    let mut left = BigInt::zero();
    let mut prev_len = 0usize;
    for &i in &order {
        let len = lengths[i];
        left <<= len - prev_len;
        prev_len = len;
        words[i] = integer_to_bits(&left, len);
        left += 1;
    }
    let entries = words
        .into_iter()
        .enumerate()
        .map(|(i, codeword)| CodeEntry { label: i.to_string(), codeword })
        .collect();
    Ok(CodeBook { entries })
}

/// Shannon–Fano code preserving the input order.
///
/// Adjacent intervals of length `w_j` are cut from the left of `[0, 1)`; the
/// codeword for `j` names the leftmost longest binary interval inside the
/// `j`-th one. Codewords are at least one bit long.
pub fn shannon_fano(weights: &WeightVector) -> CodeBook {
    let mut left = Rational::zero();
    let mut entries = Vec::with_capacity(weights.weights.len());
    for (i, w) in weights.weights.iter().enumerate() {
        let right = &left + w;
        let codeword = largest_binary_subinterval(&left, &right, 1);
        entries.push(CodeEntry { label: i.to_string(), codeword });
        left = right;
    }
    CodeBook { entries }
}

/// The leftmost longest binary interval `[x]` with `|x| ≥ min_len` contained
/// in `[lo, hi)`. Requires `0 ≤ lo < hi ≤ 1`.
pub fn largest_binary_subinterval(lo: &Rational, hi: &Rational, min_len: usize) -> BitString {
    assert!(!lo.is_negative() && lo < hi && *hi <= Rational::one());
    let mut len = min_len;
    loop {
        let scale = pow2(len as i64);
        let start = (lo * &scale).ceil();
        let end = Rational::from_integer(start.numer() + 1);
        if end <= hi * &scale {
            return integer_to_bits(start.numer(), len);
        }
        len += 1;
    }
}

fn integer_to_bits(value: &BigInt, len: usize) -> BitString {
    let bits = (0..len).rev().map(|i| value.bit(i as u64)).collect();
    BitString::from_bits(bits)
}

/// `true` iff the set of distinct codewords is prefix-free; useful for
/// images of codes where repeated values are expected.
pub fn distinct_prefix_free(words: impl IntoIterator<Item = BitString>) -> bool {
    let set: BTreeSet<BitString> = words.into_iter().collect();
    let v: Vec<_> = set.into_iter().collect();
    prefix_free_check(&v)
}
