//! Seeded generators for the randomized checks.

use std::collections::BTreeMap;

use num_integer::binomial;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::bits::BitString;
use crate::measures::{FiniteMeasure, MetricSpec};
use crate::num::{int, ratio, Dyadic, Rational};
use crate::randomness::{BernoulliTestTable, DistributionSpec, TestTable};

pub(crate) fn bits(rng: &mut ChaCha8Rng, len: usize) -> BitString {
    BitString::from_bits((0..len).map(|_| rng.gen()).collect())
}

/// A length multiset with Kraft sum at most 1, and one above 1 when the
/// first draw happened to be invalid.
pub(crate) fn lengths(rng: &mut ChaCha8Rng) -> (Vec<usize>, Option<Vec<usize>>) {
    let count = rng.gen_range(1..=12);
    let mut lens: Vec<usize> = (0..count).map(|_| rng.gen_range(0..=10)).collect();
    let sum = |l: &[usize]| l.iter().map(|&k| Dyadic::pow2_neg(k as u64)).sum::<Dyadic>();
    let invalid = (sum(&lens) > Dyadic::one()).then(|| lens.clone());
    while sum(&lens) > Dyadic::one() {
        let shortest = (0..lens.len()).min_by_key(|&i| lens[i]).unwrap();
        lens[shortest] += 1;
    }
    (lens, invalid)
}

/// Positive weights with total at most 1.
pub(crate) fn weights(rng: &mut ChaCha8Rng) -> Vec<Rational> {
    let count = rng.gen_range(1..=10);
    let nums: Vec<i64> = (0..count).map(|_| rng.gen_range(1..=20)).collect();
    let total: i64 = nums.iter().sum();
    let denom = total + rng.gen_range(0..=total);
    nums.into_iter().map(|a| ratio(a, denom)).collect()
}

/// An enumeration stream with `Σ 2^(−k) < 2`.
pub(crate) fn stream(rng: &mut ChaCha8Rng) -> Vec<(BitString, u32)> {
    let count = rng.gen_range(1..=16);
    let mut items = Vec::new();
    let mut total = Dyadic::zero();
    let two = Dyadic::new(2u32.into(), 0);
    for _ in 0..count {
        let len = rng.gen_range(0..=3);
        let z = bits(rng, len);
        let k = rng.gen_range(0..=8);
        let next = &total + &Dyadic::pow2_neg(k);
        if next < two {
            total = next;
            items.push((z, k as u32));
        }
    }
    items
}

/// A test table on `{0,1}^n` with a few random payoffs.
pub(crate) fn test_table(rng: &mut ChaCha8Rng, n: usize) -> TestTable {
    let mut values: BTreeMap<BitString, Rational> = BTreeMap::new();
    for x in BitString::all_of_length(n) {
        if rng.gen_bool(0.5) {
            values.insert(x, ratio(rng.gen_range(0..=6), rng.gen_range(1..=4)));
        }
    }
    TestTable::new(n, values).expect("lengths match")
}

/// A distribution with explicit masses on `{0,1}^n`.
pub(crate) fn distribution(rng: &mut ChaCha8Rng, n: usize) -> DistributionSpec {
    let raw: Vec<i64> = (0..1usize << n).map(|_| rng.gen_range(0..=4)).collect();
    let total: i64 = raw.iter().sum();
    if total == 0 {
        return DistributionSpec::Uniform { n };
    }
    let masses = BitString::all_of_length(n).zip(raw).filter(|(_, w)| *w > 0).map(|(x, w)| (x, ratio(w, total))).collect();
    DistributionSpec::Table { masses }
}

/// A valid Bernoulli test: nondecreasing integer increments along each
/// path, scaled down by the worst binomial ratio.
pub(crate) fn bernoulli_table(rng: &mut ChaCha8Rng, n: usize) -> BernoulliTestTable {
    let mut values: BTreeMap<BitString, Rational> = BTreeMap::new();
    for x in BitString::all_up_to(n) {
        let base = if x.is_empty() { int(0) } else { values[&x.prefix(x.len() - 1)].clone() };
        values.insert(x, base + int(rng.gen_range(0..5)));
    }
    let mut worst = int(1);
    for m in 0..=n {
        for k in 0..=m {
            let sum: Rational = BitString::all_of_length(m).filter(|x| x.count_ones() == k).map(|x| values[&x].clone()).sum();
            let r = sum / int(binomial(m as i64, k as i64));
            if r > worst {
                worst = r;
            }
        }
    }
    let values = values.into_iter().map(|(x, v)| (x, v / &worst)).collect();
    BernoulliTestTable { n, values }
}

/// A probability measure on `n` points, possibly with zero masses.
pub(crate) fn measure(rng: &mut ChaCha8Rng, n: usize) -> FiniteMeasure {
    loop {
        let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=5)).collect();
        let total: i64 = raw.iter().sum();
        if total > 0 {
            return FiniteMeasure::from_masses(raw.into_iter().map(|w| ratio(w, total)).collect()).expect("valid masses");
        }
    }
}

/// `n` distinct points in the plane under the L1 metric, scaled by `1/8`.
pub(crate) fn metric(rng: &mut ChaCha8Rng, n: usize) -> MetricSpec {
    let mut pts: Vec<(i64, i64)> = Vec::new();
    while pts.len() < n {
        let p = (rng.gen_range(0..8), rng.gen_range(0..8));
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    let d = pts
        .iter()
        .map(|a| pts.iter().map(|b| ratio((a.0 - b.0).abs() + (a.1 - b.1).abs(), 8)).collect())
        .collect();
    MetricSpec::new(d).expect("L1 distances form a metric")
}
