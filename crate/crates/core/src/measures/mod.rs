//! Finite discrete measures: entropy, relative entropy and distances.

mod prokhorov;
mod transport;

pub use prokhorov::*;
pub use transport::*;

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::machine::{EnumerationCache, MachineMode};
use crate::num::{fmt_rational, int, log2_bounds, neg_xlog2x, serde_rational, Dyadic, Interval, Rational};
use crate::verdict::Verdict;

/// Largest support the exponential and LP-based distances accept.
pub const DISTANCE_SUPPORT_CAP: usize = 20;

/// Precision of logarithm enclosures: widths stay below `2^(−30)`.
pub const LOG_BITS: u32 = 40;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct FiniteMeasure {
    points: Vec<String>,
    masses: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct RawMeasure {
    points: Vec<String>,
    #[serde(with = "serde_rational::vec")]
    masses: Vec<Rational>,
}

impl TryFrom<RawMeasure> for FiniteMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        FiniteMeasure::new(raw.points, raw.masses)
    }
}

impl From<FiniteMeasure> for RawMeasure {
    fn from(m: FiniteMeasure) -> Self {
        RawMeasure { points: m.points, masses: m.masses }
    }
}

impl FiniteMeasure {
    pub fn new(points: Vec<String>, masses: Vec<Rational>) -> Result<Self> {
        if points.len() != masses.len() {
            return Err(Error::Domain(format!("{} points but {} masses", points.len(), masses.len())));
        }
        if let Some(m) = masses.iter().find(|m| m.is_negative()) {
            return Err(Error::Domain(format!("negative mass {m}")));
        }
        let mut seen = std::collections::BTreeSet::new();
        if let Some(p) = points.iter().find(|p| !seen.insert(*p)) {
            return Err(Error::Domain(format!("point {p:?} is listed twice")));
        }
        Ok(Self { points, masses })
    }

    /// Masses on points labeled `0, 1, …`.
    pub fn from_masses(masses: Vec<Rational>) -> Result<Self> {
        Self::new((0..masses.len()).map(|i| i.to_string()).collect(), masses)
    }

    pub fn from_strings(masses: BTreeMap<BitString, Rational>) -> Result<Self> {
        let (points, masses) = masses.into_iter().map(|(x, m)| (x.to_string(), m)).unzip();
        Self::new(points, masses)
    }

    pub fn point_mass(points: Vec<String>, at: usize) -> Result<Self> {
        let masses = (0..points.len()).map(|i| if i == at { int(1) } else { int(0) }).collect();
        Self::new(points, masses)
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn masses(&self) -> &[Rational] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total(&self) -> Rational {
        self.masses.iter().sum()
    }

    pub fn require_probability(&self) -> Result<()> {
        if !self.total().is_one() {
            return Err(Error::Domain(format!("total mass is {}, not 1", fmt_rational(&self.total()))));
        }
        Ok(())
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.masses[i].is_positive()).collect()
    }
}

fn require_same_points(p: &FiniteMeasure, q: &FiniteMeasure) -> Result<()> {
    if p.points != q.points {
        return Err(Error::SupportMismatch(format!("{:?} vs {:?}", p.points, q.points)));
    }
    Ok(())
}

/// A finite metric, indexed like the measures' points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMetric", into = "RawMetric")]
pub struct MetricSpec {
    distance: Vec<Vec<Rational>>,
}

#[derive(Serialize, Deserialize)]
struct RawMetric {
    #[serde(with = "serde_rational::matrix")]
    distance: Vec<Vec<Rational>>,
}

impl TryFrom<RawMetric> for MetricSpec {
    type Error = Error;

    fn try_from(raw: RawMetric) -> Result<Self> {
        MetricSpec::new(raw.distance)
    }
}

impl From<MetricSpec> for RawMetric {
    fn from(m: MetricSpec) -> Self {
        RawMetric { distance: m.distance }
    }
}

impl MetricSpec {
    /// Validates squareness, a zero diagonal, nonnegativity, symmetry and the
    /// triangle inequality.
    pub fn new(distance: Vec<Vec<Rational>>) -> Result<Self> {
        let n = distance.len();
        let bad = |msg: String| Err(Error::Domain(format!("not a metric: {msg}")));
        if distance.iter().any(|row| row.len() != n) {
            return bad("matrix is not square".into());
        }
        for i in 0..n {
            if !distance[i][i].is_zero() {
                return bad(format!("d({i},{i}) ≠ 0"));
            }
            for j in 0..n {
                if distance[i][j].is_negative() {
                    return bad(format!("d({i},{j}) < 0"));
                }
                if distance[i][j] != distance[j][i] {
                    return bad(format!("d({i},{j}) ≠ d({j},{i})"));
                }
                for k in 0..n {
                    if distance[i][k] > &distance[i][j] + &distance[j][k] {
                        return bad(format!("d({i},{k}) > d({i},{j}) + d({j},{k})"));
                    }
                }
            }
        }
        Ok(Self { distance })
    }

    /// Every pair at distance 1.
    pub fn discrete(n: usize) -> Self {
        let distance = (0..n).map(|i| (0..n).map(|j| if i == j { int(0) } else { int(1) }).collect()).collect();
        Self { distance }
    }

    pub fn d(&self, i: usize, j: usize) -> &Rational {
        &self.distance[i][j]
    }

    pub fn len(&self) -> usize {
        self.distance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distance.is_empty()
    }

    pub fn diameter(&self) -> Rational {
        self.distance.iter().flatten().max().cloned().unwrap_or_else(Rational::zero)
    }
}

fn require_metric_fits(m: &MetricSpec, p: &FiniteMeasure) -> Result<()> {
    if m.len() != p.len() {
        return Err(Error::SupportMismatch(format!("metric on {} points, measure on {}", m.len(), p.len())));
    }
    Ok(())
}

/// Encloses `H(P) = −Σ P(x) log₂ P(x)`.
pub fn entropy(p: &FiniteMeasure) -> Result<Interval> {
    p.require_probability()?;
    Ok(entropy_at(p.masses(), LOG_BITS))
}

pub(crate) fn entropy_at(masses: &[Rational], bits: u32) -> Interval {
    masses.iter().fold(Interval::zero(), |acc, q| &acc + &neg_xlog2x(q, bits))
}

/// `−Σ μ(x) log₂(μ(x)/ν(x))`, or `−∞` when `μ` charges a point `ν` misses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelativeEntropy {
    NegInfinity,
    Finite(Interval),
}

impl RelativeEntropy {
    /// Whether the value is at most 0, decided exactly when the enclosure
    /// straddles 0 and the measures coincide.
    pub fn nonpositive(&self) -> Verdict {
        match self {
            RelativeEntropy::NegInfinity => Verdict::Pass,
            RelativeEntropy::Finite(iv) => Verdict::at_most(iv, &Rational::zero()),
        }
    }
}

pub fn relative_entropy(mu: &FiniteMeasure, nu: &FiniteMeasure) -> Result<RelativeEntropy> {
    relative_entropy_at(mu, nu, LOG_BITS)
}

/// [`relative_entropy`] with logarithms enclosed to `bits` fractional bits.
pub fn relative_entropy_at(mu: &FiniteMeasure, nu: &FiniteMeasure, bits: u32) -> Result<RelativeEntropy> {
    require_same_points(mu, nu)?;
    if mu.masses == nu.masses {
        return Ok(RelativeEntropy::Finite(Interval::zero()));
    }
    let mut acc = Interval::zero();
    for (m, n) in mu.masses.iter().zip(&nu.masses) {
        if m.is_zero() {
            continue;
        }
        if n.is_zero() {
            return Ok(RelativeEntropy::NegInfinity);
        }
        acc = &acc - &log2_bounds(&(m / n), bits).scale(m);
    }
    Ok(RelativeEntropy::Finite(acc))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpectedComplexity {
    /// `Σ P(x)·K(x)`, exact.
    pub expectation: Rational,
    pub entropy: Interval,
    /// Whether `H(P) ≤ Σ P(x)·K(x)`.
    pub shannon_bound: Verdict,
}

/// Expected description length under `P`, whose points are bit strings.
/// Fails with [`Error::InsufficientBudget`] if the window has no description
/// of a support point.
pub fn expected_complexity(p: &FiniteMeasure, cache: &EnumerationCache) -> Result<ExpectedComplexity> {
    p.require_probability()?;
    if cache.mode() != MachineMode::SelfDelimiting {
        return Err(Error::Domain(format!("needs a self-delimiting cache, got {}", cache.mode())));
    }
    let mut expectation = Rational::zero();
    for i in p.support() {
        let x: BitString = p.points[i].parse()?;
        let k = cache.shortest(&x).ok_or(Error::InsufficientBudget(x))?;
        expectation += &p.masses[i] * int(k as i64);
    }
    let (shannon_bound, entropy) =
        Verdict::at_most_refined(&expectation, LOG_BITS, 4 * LOG_BITS, |bits| entropy_at(p.masses(), bits));
    Ok(ExpectedComplexity { expectation, entropy, shannon_bound })
}

/// `Σ |P(x) − Q(x)|`.
pub fn tv_distance(p: &FiniteMeasure, q: &FiniteMeasure) -> Result<Rational> {
    require_same_points(p, q)?;
    Ok(p.masses.iter().zip(&q.masses).map(|(a, b)| (a - b).abs()).sum())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemimeasureVerdict {
    pub valid: bool,
    pub reason: Option<String>,
}

impl SemimeasureVerdict {
    fn ok() -> Self {
        Self { valid: true, reason: None }
    }

    fn bad(reason: String) -> Self {
        Self { valid: false, reason: Some(reason) }
    }
}

/// `Σ w(x) ≤ 1` on a discrete table.
pub fn semimeasure_validate(masses: &BTreeMap<BitString, Dyadic>) -> SemimeasureVerdict {
    let total: Dyadic = masses.values().sum();
    if total > Dyadic::one() {
        return SemimeasureVerdict::bad(format!("masses sum to {total}"));
    }
    SemimeasureVerdict::ok()
}

/// `μ(Λ) ≤ 1` and `μ(x) ≥ μ(x0) + μ(x1)` at every recorded node.
pub fn seq_semimeasure_validate(masses: &BTreeMap<BitString, Dyadic>) -> SemimeasureVerdict {
    let get = |x: &BitString| masses.get(x).cloned().unwrap_or_else(Dyadic::zero);
    if get(&BitString::empty()) > Dyadic::one() {
        return SemimeasureVerdict::bad("mass of the empty prefix exceeds 1".into());
    }
    for x in masses.keys() {
        let kids = &get(&x.child(false)) + &get(&x.child(true));
        if kids > get(x) {
            return SemimeasureVerdict::bad(format!("children of {x:?} carry {kids}, more than {}", get(x)));
        }
    }
    // a recorded child of an unrecorded parent
    for x in masses.keys().filter(|x| !x.is_empty()) {
        let parent = x.prefix(x.len() - 1);
        if !masses.contains_key(&parent) && !get(x).is_zero() {
            return SemimeasureVerdict::bad(format!("{x:?} has mass but its parent has none"));
        }
    }
    SemimeasureVerdict::ok()
}
