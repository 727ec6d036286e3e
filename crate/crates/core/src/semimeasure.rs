//! Resource-bounded algorithmic probability.
//!
//! `m^t(x)` weighs every self-delimiting description of `x` found in an
//! enumeration window by `2^(−|p|)`; their total is `Ω^t`. The monotone
//! counterpart `M^t(x)` is the probability that a coin-tossing program makes
//! the machine's output extend `x`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::codec::{largest_binary_subinterval, CodeBook, CodeEntry};
use crate::error::{Error, Result};
use crate::machine::{EnumerationCache, MachineMode};
use crate::num::{log2_bounds, pow2, Dyadic, Interval, Rational};

/// A finite semimeasure on strings: `Σ masses ≤ 1`. The mass not yet
/// assigned is the residual. Serializes as a JSON map from bit strings to
/// `"m/2^e"` values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<BitString, Dyadic>", into = "BTreeMap<BitString, Dyadic>")]
pub struct SemimeasureTable {
    masses: BTreeMap<BitString, Dyadic>,
}

impl SemimeasureTable {
    /// Zero masses are dropped.
    pub fn new(masses: BTreeMap<BitString, Dyadic>) -> Result<Self> {
        let masses: BTreeMap<_, _> = masses.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        let total: Dyadic = masses.values().sum();
        if total > Dyadic::one() {
            return Err(Error::KraftExceeded { sum: total });
        }
        Ok(Self { masses })
    }

    pub fn masses(&self) -> &BTreeMap<BitString, Dyadic> {
        &self.masses
    }

    pub fn get(&self, x: &BitString) -> Dyadic {
        self.masses.get(x).cloned().unwrap_or_else(Dyadic::zero)
    }

    pub fn total(&self) -> Dyadic {
        self.masses.values().sum()
    }

    pub fn residual(&self) -> Dyadic {
        Dyadic::one().checked_sub(&self.total()).expect("total is at most one")
    }
}

impl TryFrom<BTreeMap<BitString, Dyadic>> for SemimeasureTable {
    type Error = Error;

    fn try_from(masses: BTreeMap<BitString, Dyadic>) -> Result<Self> {
        Self::new(masses)
    }
}

impl From<SemimeasureTable> for BTreeMap<BitString, Dyadic> {
    fn from(t: SemimeasureTable) -> Self {
        t.masses
    }
}

/// `m^t(x)`: total weight of the window's descriptions of `x`. Needs a
/// self-delimiting cache.
pub fn m_t(cache: &EnumerationCache, x: &BitString) -> Result<Dyadic> {
    require_sd(cache)?;
    Ok(cache
        .domain()
        .filter(|(_, o)| &o.output == x)
        .map(|(p, _)| Dyadic::pow2_neg(p.len() as u64))
        .sum())
}

/// `m^t` for every reachable output at once.
pub fn m_table(cache: &EnumerationCache) -> Result<SemimeasureTable> {
    require_sd(cache)?;
    let mut masses: BTreeMap<BitString, Dyadic> = BTreeMap::new();
    for (p, o) in cache.domain() {
        let w = Dyadic::pow2_neg(p.len() as u64);
        let slot = masses.entry(o.output.clone()).or_insert_with(Dyadic::zero);
        *slot = &*slot + &w;
    }
    SemimeasureTable::new(masses)
}

/// `Ω^t`: total weight of the window's self-delimiting domain.
pub fn omega_t(cache: &EnumerationCache) -> Result<Dyadic> {
    require_sd(cache)?;
    Ok(crate::machine::domain_kraft_sum(cache))
}

fn require_sd(cache: &EnumerationCache) -> Result<()> {
    if cache.mode() != MachineMode::SelfDelimiting {
        return Err(Error::Domain(format!("needs a self-delimiting cache, got {}", cache.mode())));
    }
    Ok(())
}

/// Pointwise `Σ weights[i] · tables[i](x)`.
pub fn mixture(tables: &[SemimeasureTable], weights: &[Dyadic]) -> Result<SemimeasureTable> {
    if tables.len() != weights.len() {
        return Err(Error::InvalidWeights(format!(
            "{} tables but {} weights",
            tables.len(),
            weights.len()
        )));
    }
    let total: Dyadic = weights.iter().sum();
    if total > Dyadic::one() {
        return Err(Error::InvalidWeights(format!("weights sum to {total} > 1")));
    }
    let mut masses: BTreeMap<BitString, Dyadic> = BTreeMap::new();
    for (t, w) in tables.iter().zip(weights) {
        for (x, m) in &t.masses {
            let slot = masses.entry(x.clone()).or_insert_with(Dyadic::zero);
            *slot = &*slot + &(w * m);
        }
    }
    SemimeasureTable::new(masses)
}

/// An ordered list of claims `(z, k)` with `Σ 2^(−k) < 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationStream {
    items: Vec<(BitString, u32)>,
}

impl EnumerationStream {
    pub fn new(items: Vec<(BitString, u32)>) -> Result<Self> {
        let total: Dyadic = items.iter().map(|(_, k)| Dyadic::pow2_neg(*k as u64)).sum();
        if total >= Dyadic::new(2u32.into(), 0) {
            return Err(Error::KraftExceeded { sum: total });
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[(BitString, u32)] {
        &self.items
    }
}

impl FromStr for EnumerationStream {
    type Err = Error;

    /// One `z<TAB>k` per line; blank lines and `#` comments are skipped.
    fn from_str(s: &str) -> Result<Self> {
        let mut items = Vec::new();
        for (i, line) in s.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::Parse(format!("line {}: expected `bits<TAB>k`, got {line:?}", i + 1));
            let (z, k) = line.split_once('\t').ok_or_else(bad)?;
            items.push((z.trim().parse()?, k.trim().parse().map_err(|_| bad())?));
        }
        Self::new(items)
    }
}

impl fmt::Display for EnumerationStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (z, k) in &self.items {
            writeln!(f, "{z}\t{k}")?;
        }
        Ok(())
    }
}

/// The interval code behind the coding theorem.
///
/// Item `t` gets the next interval of length `2^(−k_t−1)` from the left of
/// `[0, 1)` and the leftmost longest binary interval inside it, so its
/// codeword is at most `k_t + 3` bits. A value claimed more than once keeps
/// its shortest codeword. Labels are the values, in order of first claim.
pub fn coding_code(stream: &EnumerationStream) -> CodeBook {
    let mut left = Rational::zero();
    let mut order: Vec<BitString> = Vec::new();
    let mut best: BTreeMap<BitString, BitString> = BTreeMap::new();
    for (z, k) in &stream.items {
        let right = &left + pow2(-(*k as i64) - 1);
        let word = largest_binary_subinterval(&left, &right, 0);
        match best.get(z) {
            None => {
                order.push(z.clone());
                best.insert(z.clone(), word);
            }
            Some(w) if word.len() < w.len() => {
                best.insert(z.clone(), word);
            }
            _ => {}
        }
        left = right;
    }
    let entries = order
        .into_iter()
        .map(|z| CodeEntry { label: z.to_string(), codeword: best[&z].clone() })
        .collect();
    CodeBook::new(entries).expect("disjoint intervals give a prefix-free code")
}

/// Masses on finite prefixes of infinite sequences.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SeqSemimeasureTable {
    masses: BTreeMap<BitString, Dyadic>,
}

impl SeqSemimeasureTable {
    pub fn new(masses: BTreeMap<BitString, Dyadic>) -> Result<Self> {
        let t = Self { masses };
        t.validate()?;
        Ok(t)
    }

    pub fn get(&self, x: &BitString) -> Dyadic {
        self.masses.get(x).cloned().unwrap_or_else(Dyadic::zero)
    }

    pub fn masses(&self) -> &BTreeMap<BitString, Dyadic> {
        &self.masses
    }

    /// Checks `μ(Λ) ≤ 1` and `μ(x) ≥ μ(x0) + μ(x1)` wherever a child is
    /// recorded; an unrecorded string has mass 0.
    pub fn validate(&self) -> Result<()> {
        if self.get(&BitString::empty()) > Dyadic::one() {
            return Err(Error::Domain("mass of the empty prefix exceeds 1".into()));
        }
        let parents: std::collections::BTreeSet<BitString> =
            self.masses.keys().filter(|x| !x.is_empty()).map(|x| x.prefix(x.len() - 1)).collect();
        for x in parents {
            let children = &self.get(&x.child(false)) + &self.get(&x.child(true));
            if children > self.get(&x) {
                return Err(Error::Domain(format!(
                    "children of {x:?} carry {children}, more than its {}",
                    self.get(&x)
                )));
            }
        }
        Ok(())
    }
}

fn require_mono(cache: &EnumerationCache) -> Result<()> {
    if cache.mode() != MachineMode::Monotone {
        return Err(Error::Domain(format!("needs a monotone cache, got {}", cache.mode())));
    }
    Ok(())
}

/// `M^t(x)`: weight of the programs that are minimal for `x`, meaning the
/// output first extends `x` exactly when the program's last bit has been
/// read. Those programs form a prefix-free set.
pub fn monotone_m(cache: &EnumerationCache, x: &BitString) -> Result<Dyadic> {
    require_mono(cache)?;
    Ok(cache
        .iter()
        .filter(|(p, o)| o.consumed_when_extending(x) == Some(p.len()))
        .map(|(p, _)| Dyadic::pow2_neg(p.len() as u64))
        .sum())
}

/// `M^t` on every prefix any program reaches, in one pass.
///
/// A program `p` is minimal for exactly the prefixes of its output whose
/// length lies between the output length before `p`'s last bit was read
/// (exclusive) and the output length once it was read (inclusive).
pub fn monotone_table(cache: &EnumerationCache) -> Result<SeqSemimeasureTable> {
    require_mono(cache)?;
    let mut masses: BTreeMap<BitString, Dyadic> = BTreeMap::new();
    masses.insert(BitString::empty(), Dyadic::one());
    for (p, o) in cache.iter() {
        let trace = o.trace.as_deref().unwrap_or(&[]);
        let before = trace.iter().filter(|e| e.consumed < p.len()).map(|e| e.output_len).max().unwrap_or(0);
        let after = trace.iter().filter(|e| e.consumed == p.len()).map(|e| e.output_len).max().unwrap_or(0);
        let w = Dyadic::pow2_neg(p.len() as u64);
        for len in before + 1..=after {
            let slot = masses.entry(o.output.prefix(len)).or_insert_with(Dyadic::zero);
            *slot = &*slot + &w;
        }
    }
    SeqSemimeasureTable::new(masses)
}

/// Encloses `KM^t(x) = −log₂ M^t(x)`; `None` at zero mass.
pub fn km(m: &Dyadic, bits: u32) -> Option<Interval> {
    (!m.is_zero()).then(|| -&log2_bounds(&m.to_rational(), bits))
}

/// A computable probability on infinite binary sequences, given by its
/// values on cylinders.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SequenceMeasure {
    Uniform,
    /// Independent bits, each 1 with probability `p`.
    Bernoulli {
        #[serde(with = "crate::num::serde_rational")]
        p: Rational,
    },
}

impl SequenceMeasure {
    pub fn bernoulli(p: Rational) -> Result<Self> {
        if p.is_negative() || p > Rational::one() {
            return Err(Error::Domain(format!("Bernoulli parameter {p} is not in [0, 1]")));
        }
        Ok(SequenceMeasure::Bernoulli { p })
    }

    /// Probability of the cylinder of sequences starting with `x`.
    pub fn prob(&self, x: &BitString) -> Rational {
        match self {
            SequenceMeasure::Uniform => pow2(-(x.len() as i64)),
            SequenceMeasure::Bernoulli { p } => {
                let ones = x.count_ones() as i32;
                let zeros = x.len() as i32 - ones;
                num_traits::pow(p.clone(), ones as usize)
                    * num_traits::pow(Rational::one() - p, zeros as usize)
            }
        }
    }
}

/// Encloses `max_{n ≤ |prefix|} log₂(M^t(prefix[..n]) / P(prefix[..n]))`.
///
/// Its lower end is a certified lower bound on the sequence deficiency of
/// every extension of `prefix`, since `M^t` underestimates `M`. Prefixes of
/// zero `M^t` mass contribute nothing; `n = 0` always contributes 0.
pub fn seq_test_dprime(
    table: &SeqSemimeasureTable,
    prefix: &BitString,
    measure: &SequenceMeasure,
    bits: u32,
) -> Result<Interval> {
    let mut best = Interval::zero();
    for n in 0..=prefix.len() {
        let x = prefix.prefix(n);
        let p = measure.prob(&x);
        if p.is_zero() {
            return Err(Error::Domain(format!("prefix {x:?} has probability zero")));
        }
        let m = table.get(&x);
        if m.is_zero() {
            continue;
        }
        best = best.max(&log2_bounds(&(m.to_rational() / p), bits));
    }
    Ok(best)
}
