//! Randomness tests on finite strings, checked in exact arithmetic.
//!
//! A test is stored as its payoff `t(x) = 2^d(x)` so that it stays rational;
//! the deficiency `d` itself is only ever produced as an [`Interval`].

mod bernoulli;

pub use bernoulli::*;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::machine::{EnumerationCache, MachineMode};
use crate::num::{fmt_rational, int, log2_bounds, pow2, serde_rational, Interval, Rational};

/// Largest string length whose full support is ever materialized.
pub const SUPPORT_LEN_CAP: usize = 20;

/// A probability distribution on binary strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistributionSpec {
    /// Uniform on `{0,1}^n`.
    Uniform { n: usize },
    /// Independent bits, each 1 with probability `p`, on `{0,1}^n`.
    Bernoulli {
        #[serde(with = "serde_rational")]
        p: Rational,
        n: usize,
    },
    /// Explicit masses summing to exactly 1.
    Table {
        #[serde(with = "serde_rational::bitmap")]
        masses: BTreeMap<BitString, Rational>,
    },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::Uniform { n } | DistributionSpec::Bernoulli { n, .. }
                if *n > SUPPORT_LEN_CAP =>
            {
                Err(Error::SupportTooLarge { size: *n, cap: SUPPORT_LEN_CAP })
            }
            DistributionSpec::Bernoulli { p, .. } if p.is_negative() || *p > Rational::one() => {
                Err(Error::Domain(format!("Bernoulli parameter {p} is not in [0, 1]")))
            }
            DistributionSpec::Table { masses } => {
                if let Some((x, m)) = masses.iter().find(|(_, m)| m.is_negative()) {
                    return Err(Error::Domain(format!("negative mass {m} at {x:?}")));
                }
                let total: Rational = masses.values().sum();
                if !total.is_one() {
                    return Err(Error::Domain(format!("masses sum to {}, not 1", fmt_rational(&total))));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Common length of the support strings, if there is one.
    pub fn length(&self) -> Option<usize> {
        match self {
            DistributionSpec::Uniform { n } | DistributionSpec::Bernoulli { n, .. } => Some(*n),
            DistributionSpec::Table { masses } => {
                let mut lens = masses.keys().map(BitString::len);
                let first = lens.next()?;
                lens.all(|l| l == first).then_some(first)
            }
        }
    }

    pub fn prob(&self, x: &BitString) -> Rational {
        match self {
            DistributionSpec::Uniform { n } => {
                if x.len() == *n {
                    pow2(-(*n as i64))
                } else {
                    Rational::zero()
                }
            }
            DistributionSpec::Bernoulli { p, n } => {
                if x.len() != *n {
                    return Rational::zero();
                }
                let ones = x.count_ones();
                num_traits::pow(p.clone(), ones) * num_traits::pow(Rational::one() - p, *n - ones)
            }
            DistributionSpec::Table { masses } => masses.get(x).cloned().unwrap_or_else(Rational::zero),
        }
    }

    /// Every string of positive probability, with its probability.
    pub fn support(&self) -> Result<Vec<(BitString, Rational)>> {
        self.validate()?;
        Ok(match self {
            DistributionSpec::Table { masses } => {
                masses.iter().filter(|(_, m)| m.is_positive()).map(|(x, m)| (x.clone(), m.clone())).collect()
            }
            DistributionSpec::Uniform { n } | DistributionSpec::Bernoulli { n, .. } => BitString::all_of_length(*n)
                .map(|x| {
                    let p = self.prob(&x);
                    (x, p)
                })
                .filter(|(_, p)| p.is_positive())
                .collect(),
        })
    }
}

/// Payoffs `t(x) = 2^d(x)` on strings of length `n`. Unlisted strings pay 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestTable {
    pub n: usize,
    #[serde(with = "serde_rational::bitmap")]
    pub values: BTreeMap<BitString, Rational>,
}

impl TestTable {
    pub fn new(n: usize, values: BTreeMap<BitString, Rational>) -> Result<Self> {
        let t = Self { n, values };
        t.validate()?;
        Ok(t)
    }

    /// The same payoff on every string of length `n`.
    pub fn constant(n: usize, value: Rational) -> Result<Self> {
        if n > SUPPORT_LEN_CAP {
            return Err(Error::SupportTooLarge { size: n, cap: SUPPORT_LEN_CAP });
        }
        Self::new(n, BitString::all_of_length(n).map(|x| (x, value.clone())).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((x, v)) = self.values.iter().find(|(_, v)| v.is_negative()) {
            return Err(Error::Domain(format!("negative payoff {v} at {x:?}")));
        }
        if let Some(x) = self.values.keys().find(|x| x.len() != self.n) {
            return Err(Error::SupportMismatch(format!("{x:?} in a table for length {}", self.n)));
        }
        Ok(())
    }

    pub fn get(&self, x: &BitString) -> Rational {
        self.values.get(x).cloned().unwrap_or_else(Rational::zero)
    }
}

fn shared_support(t: &TestTable, p: &DistributionSpec) -> Result<Vec<(BitString, Rational)>> {
    t.validate()?;
    let support = p.support()?;
    if let Some((x, _)) = support.iter().find(|(x, _)| x.len() != t.n) {
        return Err(Error::SupportMismatch(format!(
            "distribution charges {x:?} but the test is on length {}",
            t.n
        )));
    }
    Ok(support)
}

/// The LLN test on one string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LlnValue {
    /// `2^d(x)`, exact.
    pub payoff: Rational,
    pub d: Interval,
}

/// `2^d(x) = (k/n)^k ((n−k)/n)^(n−k) · 2^n / (n+1)` with `k` ones in `x`,
/// using `0^0 = 1`.
pub fn lln_payoff(x: &BitString) -> Result<Rational> {
    let n = x.len();
    if n == 0 {
        return Err(Error::Domain("the LLN test needs a nonempty string".into()));
    }
    let k = x.count_ones();
    let freq = Rational::new(BigInt::from(k), BigInt::from(n));
    let px = num_traits::pow(freq.clone(), k) * num_traits::pow(Rational::one() - freq, n - k);
    Ok(px * pow2(n as i64) / int(n as i64 + 1))
}

pub fn lln_test(x: &BitString, bits: u32) -> Result<LlnValue> {
    let payoff = lln_payoff(x)?;
    let d = log2_bounds(&payoff, bits);
    Ok(LlnValue { payoff, d })
}

/// The LLN test tabulated on all of `{0,1}^n`.
pub fn lln_table(n: usize) -> Result<TestTable> {
    if n > SUPPORT_LEN_CAP {
        return Err(Error::SupportTooLarge { size: n, cap: SUPPORT_LEN_CAP });
    }
    let values = BitString::all_of_length(n).map(|x| lln_payoff(&x).map(|v| (x, v))).collect::<Result<_>>()?;
    TestTable::new(n, values)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrableVerdict {
    /// `Σ P(x) t(x)`.
    #[serde(with = "serde_rational")]
    pub expectation: Rational,
    pub integrable: bool,
}

/// Exact expectation of the payoff; integrable iff it is at most 1.
pub fn integrable_check(t: &TestTable, p: &DistributionSpec) -> Result<IntegrableVerdict> {
    let expectation: Rational = shared_support(t, p)?.iter().map(|(x, px)| px * t.get(x)).sum();
    let integrable = expectation <= Rational::one();
    Ok(IntegrableVerdict { expectation, integrable })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlFailure {
    pub k: u32,
    /// `P{t(x) > 2^k}`, which should have been below `2^(−k)`.
    #[serde(with = "serde_rational")]
    pub mass: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlVerdict {
    pub passes: bool,
    /// Levels `k` checked: every `k ≥ 0` with `2^k` below the largest payoff.
    pub levels_checked: u32,
    pub failure: Option<MlFailure>,
}

/// Checks `P{t(x) > 2^k} < 2^(−k)` at every level where the left side can be
/// nonzero.
pub fn ml_check(t: &TestTable, p: &DistributionSpec) -> Result<MlVerdict> {
    let support = shared_support(t, p)?;
    let max = support.iter().map(|(x, _)| t.get(x)).max().unwrap_or_else(Rational::zero);
    let mut k = 0u32;
    while pow2(k as i64) < max {
        let threshold = pow2(k as i64);
        let mass: Rational = support.iter().filter(|(x, _)| t.get(x) > threshold).map(|(_, px)| px.clone()).sum();
        if mass >= pow2(-(k as i64)) {
            return Ok(MlVerdict { passes: false, levels_checked: k + 1, failure: Some(MlFailure { k, mass }) });
        }
        k += 1;
    }
    Ok(MlVerdict { passes: true, levels_checked: k, failure: None })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkovTail {
    #[serde(with = "serde_rational")]
    pub mean: Rational,
    /// `P{f(x) > λ·E f}`.
    #[serde(with = "serde_rational")]
    pub tail: Rational,
    /// `1/λ`.
    #[serde(with = "serde_rational")]
    pub bound: Rational,
    pub holds: bool,
}

pub fn markov_tail(p: &DistributionSpec, f: &TestTable, lambda: &Rational) -> Result<MarkovTail> {
    if !lambda.is_positive() {
        return Err(Error::Domain(format!("Markov's inequality needs λ > 0, got {lambda}")));
    }
    let support = shared_support(f, p)?;
    let mean: Rational = support.iter().map(|(x, px)| px * f.get(x)).sum();
    let cut = lambda * &mean;
    let tail: Rational = support.iter().filter(|(x, _)| f.get(x) > cut).map(|(_, px)| px.clone()).sum();
    let bound = lambda.recip();
    let holds = tail <= bound;
    Ok(MarkovTail { mean, tail, bound, holds })
}

/// `d̄_P(x) = −log₂ P(x) − K(x)` with `K` taken from a self-delimiting cache
/// on the empty condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deficiency {
    pub complexity: usize,
    /// `2^d̄ = 2^(−K)/P(x)`, exact.
    pub payoff: Rational,
    pub value: Interval,
}

/// Lower bound on the universal deficiency; `None` when the window holds no
/// description of `x`.
pub fn deficiency_bar(
    cache: &EnumerationCache,
    x: &BitString,
    p: &DistributionSpec,
    bits: u32,
) -> Result<Option<Deficiency>> {
    require_sd_empty(cache)?;
    let px = p.prob(x);
    if !px.is_positive() {
        return Err(Error::Domain(format!("{x:?} has probability zero")));
    }
    Ok(cache.shortest(x).map(|k| {
        let payoff = pow2(-(k as i64)) / &px;
        let value = log2_bounds(&payoff, bits);
        Deficiency { complexity: k, payoff, value }
    }))
}

fn require_sd_empty(cache: &EnumerationCache) -> Result<()> {
    if cache.mode() != MachineMode::SelfDelimiting || !cache.condition().is_empty() {
        return Err(Error::Domain(format!(
            "needs a self-delimiting cache on the empty condition, got {} on {:?}",
            cache.mode(),
            cache.condition()
        )));
    }
    Ok(())
}

/// A computable map on strings, for the conservation checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StringMap {
    Identity,
    /// Removes the final bit; undefined on the empty string.
    DropLast,
    /// Appends the parity of the ones in the string.
    ParityExtend,
}

impl StringMap {
    pub fn apply(self, x: &BitString) -> Option<BitString> {
        match self {
            StringMap::Identity => Some(x.clone()),
            StringMap::DropLast => (!x.is_empty()).then(|| x.prefix(x.len() - 1)),
            StringMap::ParityExtend => Some(x.child(x.count_ones() % 2 == 1)),
        }
    }
}

impl std::str::FromStr for StringMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(StringMap::Identity),
            "drop-last" => Ok(StringMap::DropLast),
            "parity-extend" => Ok(StringMap::ParityExtend),
            other => Err(Error::Parse(format!("unknown map {other:?}"))),
        }
    }
}

/// Image of `P` under `f`: `(f*P)(y) = P(f⁻¹(y))`.
pub fn image_measure(f: StringMap, p: &DistributionSpec) -> Result<BTreeMap<BitString, Rational>> {
    let mut image: BTreeMap<BitString, Rational> = BTreeMap::new();
    for (x, px) in p.support()? {
        let y = f.apply(&x).ok_or_else(|| Error::Domain(format!("{f:?} is undefined on {x:?}")))?;
        *image.entry(y).or_insert_with(Rational::zero) += px;
    }
    Ok(image)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConservationReport {
    pub image: BTreeMap<BitString, Rational>,
    /// `Σ_x P(x)·2^(d_P(x))` for the pulled-back test `d_P(x) = d̄_{f*P}(f(x))`.
    pub pulled_back_expectation: Rational,
    /// `Σ_y 2^(−K(y))` over the image support; equal to the expectation.
    pub image_kraft: Rational,
    pub integrable: bool,
    /// Image points with no description in the window; they pay 0.
    pub missing: usize,
    /// Largest `d̄_{f*P}(f(x)) − d̄_P(x)` over points where both are defined.
    pub max_gap: Option<Interval>,
}

/// Checks that randomness is conserved by `f` up to the window's resolution.
pub fn conservation_report(
    f: StringMap,
    p: &DistributionSpec,
    cache: &EnumerationCache,
    bits: u32,
) -> Result<ConservationReport> {
    require_sd_empty(cache)?;
    let image = image_measure(f, p)?;
    let mut expectation = Rational::zero();
    let mut max_gap: Option<Interval> = None;
    for (x, px) in p.support()? {
        let y = f.apply(&x).expect("image_measure checked totality");
        let Some(ky) = cache.shortest(&y) else { continue };
        let fpy = &image[&y];
        let payoff = pow2(-(ky as i64)) / fpy;
        expectation += &px * &payoff;
        if let Some(kx) = cache.shortest(&x) {
            // d̄_{f*P}(y) − d̄_P(x) = log(P(x)/f*P(y)) + K(x) − K(y)
            let gap = &log2_bounds(&(&px / fpy), bits) + &Interval::point(int(kx as i64 - ky as i64));
            max_gap = Some(match max_gap {
                Some(g) => g.max(&gap),
                None => gap,
            });
        }
    }
    let mut image_kraft = Rational::zero();
    let mut missing = 0;
    for y in image.keys() {
        match cache.shortest(y) {
            Some(k) => image_kraft += pow2(-(k as i64)),
            None => missing += 1,
        }
    }
    let integrable = expectation <= Rational::one();
    Ok(ConservationReport { image, pulled_back_expectation: expectation, image_kraft, integrable, missing, max_gap })
}

/// `K(x) + K(y) − K(⟨x, y⟩)` with the pair tuple-encoded; `None` if any term
/// is outside the window.
pub fn info_estimate(cache: &EnumerationCache, x: &BitString, y: &BitString) -> Result<Option<i64>> {
    require_sd_empty(cache)?;
    let pair = crate::codec::tuple_encode(&[x.clone(), y.clone()]);
    Ok(match (cache.shortest(x), cache.shortest(y), cache.shortest(&pair)) {
        (Some(a), Some(b), Some(c)) => Some(a as i64 + b as i64 - c as i64),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::machine::enumerate;
    use crate::num::ratio;
    use proptest::prelude::*;

    fn uniform(n: usize) -> DistributionSpec {
        DistributionSpec::Uniform { n }
    }

    #[test]
    fn distribution_specs() {
        let b = DistributionSpec::Bernoulli { p: ratio(1, 3), n: 2 };
        let total: Rational = b.support().unwrap().iter().map(|(_, p)| p.clone()).sum();
        assert_eq!(total, int(1));
        assert_eq!(b.prob(&bs("10")), ratio(2, 9));
        assert_eq!(b.prob(&bs("1")), int(0));
        assert_eq!(DistributionSpec::Bernoulli { p: int(1), n: 3 }.support().unwrap().len(), 1);
        let bad = DistributionSpec::Table { masses: [(bs("0"), ratio(1, 2))].into() };
        assert!(bad.validate().is_err());
        assert!(uniform(SUPPORT_LEN_CAP + 1).support().is_err());
        let json = r#"{"kind":"table","masses":{"0":"1/4","1":"3/4"}}"#;
        let t: DistributionSpec = serde_json::from_str(json).unwrap();
        assert_eq!(t.length(), Some(1));
        assert_eq!(serde_json::to_string(&t).unwrap(), json);
        let u: DistributionSpec = serde_json::from_str(r#"{"kind":"uniform","n":3}"#).unwrap();
        assert_eq!(u, uniform(3));
    }

    #[test]
    fn lln_examples() {
        let v = lln_test(&bs("11"), 40).unwrap();
        assert_eq!(v.payoff, ratio(4, 3));
        assert!((v.d.midpoint_f64() - (2.0 - 3f64.log2())).abs() < 1e-9);
        let v = lln_test(&bs("01"), 40).unwrap();
        assert_eq!(v.payoff, ratio(1, 3));
        assert!((v.d.midpoint_f64() + 3f64.log2()).abs() < 1e-9);
        assert!(lln_test(&bs(""), 10).is_err());
    }

    #[test]
    fn lln_is_integrable_up_to_twelve() {
        for n in 1..=12 {
            let v = integrable_check(&lln_table(n).unwrap(), &uniform(n)).unwrap();
            // the k = 0 and k = n terms pay exactly 1, so n = 1 sits on the bound
            if n == 1 {
                assert_eq!(v.expectation, int(1));
            } else {
                assert!(v.expectation < int(1), "n={n}");
            }
            assert!(v.integrable);
            assert!(ml_check(&lln_table(n).unwrap(), &uniform(n)).unwrap().passes);
        }
    }

    #[test]
    fn integrable_examples() {
        let p = DistributionSpec::Bernoulli { p: ratio(1, 5), n: 3 };
        let one = integrable_check(&TestTable::constant(3, int(1)).unwrap(), &p).unwrap();
        assert_eq!((one.expectation, one.integrable), (int(1), true));
        let two = integrable_check(&TestTable::constant(3, int(2)).unwrap(), &p).unwrap();
        assert_eq!((two.expectation, two.integrable), (int(2), false));
        assert!(integrable_check(&TestTable::constant(2, int(1)).unwrap(), &p).is_err());
    }

    #[test]
    fn ml_examples() {
        let zero = TestTable::new(4, BTreeMap::new()).unwrap();
        assert!(ml_check(&zero, &uniform(4)).unwrap().passes);
        // one point paying 2^n has mass 2^(−n), exactly at the strict boundary
        // only at level n, where the set {t > 2^n} is already empty
        let n = 4;
        let spike = TestTable::new(n, [(bs("0110"), pow2(n as i64))].into()).unwrap();
        assert!(ml_check(&spike, &uniform(n)).unwrap().passes);
        let tall = TestTable::new(n, [(bs("0110"), pow2(n as i64 + 1))].into()).unwrap();
        let v = ml_check(&tall, &uniform(n)).unwrap();
        assert_eq!(v.failure, Some(MlFailure { k: n as u32, mass: pow2(-(n as i64)) }));
    }

    fn arb_table() -> impl Strategy<Value = (TestTable, DistributionSpec)> {
        (1usize..=4).prop_flat_map(|n| {
            let size = 1 << n;
            (
                proptest::collection::vec(0u32..40, size),
                proptest::collection::vec(1u32..10, size),
            )
                .prop_map(move |(raw, weights)| {
                    let total: u32 = weights.iter().sum();
                    let masses: BTreeMap<_, _> = BitString::all_of_length(n)
                        .zip(&weights)
                        .map(|(x, &w)| (x, ratio(w as i64, total as i64)))
                        .collect();
                    let values = BitString::all_of_length(n).zip(&raw).map(|(x, &v)| (x, ratio(v as i64, 8))).collect();
                    (TestTable { n, values }, DistributionSpec::Table { masses })
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]
        #[test]
        fn integrable_implies_ml((t, p) in arb_table()) {
            let v = integrable_check(&t, &p).unwrap();
            // rescale so that the expectation is at most one
            let t = if v.integrable || v.expectation.is_zero() {
                t
            } else {
                let values = t.values.iter().map(|(x, y)| (x.clone(), y / &v.expectation)).collect();
                TestTable { n: t.n, values }
            };
            prop_assert!(integrable_check(&t, &p).unwrap().integrable);
            prop_assert!(ml_check(&t, &p).unwrap().passes);
        }
    }

    #[test]
    fn markov_examples() {
        let p = uniform(2);
        let c = markov_tail(&p, &TestTable::constant(2, int(3)).unwrap(), &int(2)).unwrap();
        assert_eq!(c.tail, int(0));
        let point = TestTable::new(2, [(bs("00"), int(4))].into()).unwrap();
        let m = markov_tail(&p, &point, &int(2)).unwrap();
        assert_eq!((m.mean, m.tail.clone(), m.bound), (int(1), ratio(1, 4), ratio(1, 2)));
        assert!(m.holds);
        assert!(markov_tail(&p, &point, &int(1)).unwrap().holds);
        assert!(markov_tail(&p, &point, &int(0)).is_err());
    }

    #[test]
    fn deficiency_masses_form_a_kraft_sum() {
        let cache = enumerate(MachineMode::SelfDelimiting, &bs(""), 14, 50).unwrap();
        for n in 0..=4 {
            let p = uniform(n);
            let mut total = Rational::zero();
            let mut all_found = true;
            for (x, px) in p.support().unwrap() {
                match deficiency_bar(&cache, &x, &p, 20).unwrap() {
                    Some(d) => {
                        total += &px * &d.payoff;
                        assert!(d.value.contains(&(int(n as i64) - int(d.complexity as i64))));
                    }
                    None => all_found = false,
                }
            }
            assert!(total <= int(1));
            if n <= 1 {
                assert!(all_found);
            }
        }
        assert!(deficiency_bar(&cache, &bs("1"), &uniform(2), 20).is_err());
    }

    #[test]
    fn deficiency_grows_with_budget() {
        let p = uniform(3);
        let lo = enumerate(MachineMode::SelfDelimiting, &bs(""), 14, 3).unwrap();
        let hi = enumerate(MachineMode::SelfDelimiting, &bs(""), 14, 30).unwrap();
        for (x, _) in p.support().unwrap() {
            if let Some(a) = deficiency_bar(&lo, &x, &p, 20).unwrap() {
                let b = deficiency_bar(&hi, &x, &p, 20).unwrap().unwrap();
                assert!(b.payoff >= a.payoff);
            }
        }
    }

    #[test]
    fn conservation_examples() {
        let cache = enumerate(MachineMode::SelfDelimiting, &bs(""), 16, 50).unwrap();
        let p = uniform(3);
        let id = conservation_report(StringMap::Identity, &p, &cache, 20).unwrap();
        assert_eq!(id.image, p.support().unwrap().into_iter().collect());
        if let Some(g) = &id.max_gap {
            assert!(g.contains(&int(0)));
        }
        let drop = conservation_report(StringMap::DropLast, &p, &cache, 20).unwrap();
        assert!(drop.image.values().all(|m| *m == ratio(1, 4)));
        assert_eq!(drop.image.len(), 4);
        for r in [&id, &drop, &conservation_report(StringMap::ParityExtend, &p, &cache, 20).unwrap()] {
            assert_eq!(r.pulled_back_expectation, r.image_kraft);
            assert!(r.integrable);
        }
        assert!(conservation_report(StringMap::DropLast, &uniform(0), &cache, 20).is_err());
    }

    #[test]
    fn info_is_symmetric_in_its_sum_terms() {
        let cache = enumerate(MachineMode::SelfDelimiting, &bs(""), 12, 50).unwrap();
        // the pair encoding of (Λ, Λ) is ten bits, out of reach at this window
        assert_eq!(info_estimate(&cache, &bs(""), &bs("")).unwrap(), None);
    }
}
