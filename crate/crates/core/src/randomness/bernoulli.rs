//! Tests for the class of Bernoulli measures, gap functions and the
//! separating test.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::num::{pow2, serde_rational, Rational};

use super::SUPPORT_LEN_CAP;

/// A candidate combinatorial Bernoulli test on strings of length `≤ n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BernoulliTestTable {
    pub n: usize,
    #[serde(with = "serde_rational::bitmap")]
    pub values: BTreeMap<BitString, Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BernoulliViolation {
    Missing {
        x: BitString,
    },
    Negative {
        x: BitString,
    },
    NotMonotone {
        parent: BitString,
        child: BitString,
    },
    /// `Σ_{x ∈ B(m,k)} f(x)` exceeds `C(m,k)`.
    BinomialSum {
        m: usize,
        k: usize,
        #[serde(with = "serde_rational")]
        sum: Rational,
        bound: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BernoulliVerdict {
    pub valid: bool,
    pub violation: Option<BernoulliViolation>,
}

impl BernoulliTestTable {
    pub fn constant(n: usize, value: Rational) -> Result<Self> {
        if n > SUPPORT_LEN_CAP {
            return Err(Error::SupportTooLarge { size: n, cap: SUPPORT_LEN_CAP });
        }
        Ok(Self { n, values: BitString::all_up_to(n).map(|x| (x, value.clone())).collect() })
    }

    pub fn get(&self, x: &BitString) -> Option<&Rational> {
        self.values.get(x)
    }

    /// Restriction to strings of length `≤ m`.
    pub fn restrict(&self, m: usize) -> Self {
        let values = self.values.iter().filter(|(x, _)| x.len() <= m).map(|(x, v)| (x.clone(), v.clone())).collect();
        Self { n: m.min(self.n), values }
    }
}

/// Checks nonnegativity, monotonicity along prefixes and every binomial sum
/// bound, reporting the first violation in shortlex order.
pub fn bernoulli_validate(f: &BernoulliTestTable) -> BernoulliVerdict {
    match first_violation(f) {
        Some(v) => BernoulliVerdict { valid: false, violation: Some(v) },
        None => BernoulliVerdict { valid: true, violation: None },
    }
}

fn first_violation(f: &BernoulliTestTable) -> Option<BernoulliViolation> {
    if f.n > SUPPORT_LEN_CAP {
        return Some(BernoulliViolation::Missing { x: BitString::from_bits(vec![false; SUPPORT_LEN_CAP + 1]) });
    }
    for m in 0..=f.n {
        let mut sums = vec![Rational::zero(); m + 1];
        for x in BitString::all_of_length(m) {
            let Some(v) = f.get(&x) else { return Some(BernoulliViolation::Missing { x }) };
            if v.is_negative() {
                return Some(BernoulliViolation::Negative { x });
            }
            if m > 0 {
                let parent = x.prefix(m - 1);
                if f.get(&parent).is_some_and(|p| p > v) {
                    return Some(BernoulliViolation::NotMonotone { parent, child: x });
                }
            }
            sums[x.count_ones()] += v;
        }
        for (k, sum) in sums.into_iter().enumerate() {
            let bound: u64 = binomial(m as u64, k as u64);
            if sum > Rational::from_integer(BigInt::from(bound)) {
                return Some(BernoulliViolation::BinomialSum { m, k, sum, bound });
            }
        }
    }
    None
}

/// Extends a valid test one level by `f(xs) = f(x)`.
pub fn bernoulli_extend(f: &BernoulliTestTable) -> Result<BernoulliTestTable> {
    if let Some(v) = first_violation(f) {
        return Err(Error::Domain(format!("cannot extend an invalid test: {v:?}")));
    }
    if f.n + 1 > SUPPORT_LEN_CAP {
        return Err(Error::SupportTooLarge { size: f.n + 1, cap: SUPPORT_LEN_CAP });
    }
    let mut values = f.values.clone();
    for x in BitString::all_of_length(f.n) {
        let v = f.values[&x].clone();
        values.insert(x.child(false), v.clone());
        values.insert(x.child(true), v);
    }
    Ok(BernoulliTestTable { n: f.n + 1, values })
}

/// Gap function values `D(n, k)` for `1 ≤ n ≤ n_max`, `0 ≤ k ≤ n`; row
/// `n − 1` holds `D(n, 0..=n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapFunction {
    pub rows: Vec<Vec<u32>>,
}

impl GapFunction {
    pub fn from_fn(n_max: usize, d: impl Fn(usize, usize) -> u32) -> Self {
        Self { rows: (1..=n_max).map(|n| (0..=n).map(|k| d(n, k)).collect()).collect() }
    }

    pub fn n_max(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapCheck {
    #[serde(with = "serde_rational")]
    pub p: Rational,
    /// `Σ_{n ≤ n_max} Σ_k B_p(n,k)·2^(−D(n,k))`.
    #[serde(with = "serde_rational")]
    pub partial_sum: Rational,
    pub passes: bool,
}

/// For each grid point `p`, checks `partial sum + tail_bound ≤ 1` exactly.
///
/// `tail_bound` must dominate `Σ_{n > n_max} max_k 2^(−D(n,k))`; it is taken
/// on trust.
pub fn gap_check(d: &GapFunction, p_grid: &[Rational], tail_bound: &Rational) -> Result<Vec<GapCheck>> {
    for (i, row) in d.rows.iter().enumerate() {
        if row.len() != i + 2 {
            return Err(Error::Domain(format!(
                "gap function row for n = {} has {} entries, needs {}",
                i + 1,
                row.len(),
                i + 2
            )));
        }
    }
    if tail_bound.is_negative() {
        return Err(Error::Domain("tail bound must be nonnegative".into()));
    }
    p_grid
        .iter()
        .map(|p| {
            if p.is_negative() || *p > Rational::one() {
                return Err(Error::Domain(format!("grid point {p} is not in [0, 1]")));
            }
            let q = Rational::one() - p;
            let mut total = Rational::zero();
            for (i, row) in d.rows.iter().enumerate() {
                let n = i + 1;
                for (k, &dk) in row.iter().enumerate() {
                    let b = Rational::from_integer(binomial(BigInt::from(n), BigInt::from(k)))
                        * num_traits::pow(p.clone(), k)
                        * num_traits::pow(q.clone(), n - k);
                    total += b * pow2(-(dk as i64));
                }
            }
            let passes = &total + tail_bound <= Rational::one();
            Ok(GapCheck { p: p.clone(), partial_sum: total, passes })
        })
        .collect()
}

/// `|ones − 2^k·p| > 2^(0.6k)`, decided exactly as
/// `|ones·b − 2^k·a|^5 > 2^(3k)·b^5` for `p = a/b`.
pub fn deviation_exceeds(ones: u64, k: u32, p: &Rational) -> bool {
    let b = p.denom();
    let delta = (BigInt::from(ones) * b - (BigInt::one() << k as usize) * p.numer()).abs();
    num_traits::pow(delta, 5) > (BigInt::one() << (3 * k) as usize) * num_traits::pow(b.clone(), 5)
}

/// Largest `k` with `2^k ≤ |prefix|` whose first `2^k` bits deviate from
/// `2^k·p` ones by more than `2^(0.6k)`; 0 if there is none.
pub fn separating_gp(prefix: &BitString, p: &Rational) -> Result<u32> {
    if prefix.len() < 2 {
        return Err(Error::Domain("the separating test needs at least two bits".into()));
    }
    let mut best = 0;
    let mut ones = 0u64;
    let mut k = 0u32;
    for (i, &bit) in prefix.bits().iter().enumerate() {
        ones += bit as u64;
        if i + 1 == 1 << k {
            if deviation_exceeds(ones, k, p) {
                best = k;
            }
            k += 1;
        }
    }
    Ok(best)
}
