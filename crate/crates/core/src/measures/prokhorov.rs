use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{require_metric_fits, require_same_points, FiniteMeasure, MetricSpec, DISTANCE_SUPPORT_CAP};
use crate::error::{Error, Result};
use crate::num::{serde_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProkhorovReport {
    /// `inf{ε : μ(A) ≤ ν(A^ε) + ε for all A}`.
    #[serde(with = "serde_rational")]
    pub mu_over_nu: Rational,
    /// The same with the roles swapped.
    #[serde(with = "serde_rational")]
    pub nu_over_mu: Rational,
    /// The larger of the two.
    #[serde(with = "serde_rational")]
    pub distance: Rational,
}

/// Symmetrized Prokhorov distance of two probability measures.
pub fn prokhorov(mu: &FiniteMeasure, nu: &FiniteMeasure, metric: &MetricSpec) -> Result<Rational> {
    Ok(prokhorov_report(mu, nu, metric)?.distance)
}

pub fn prokhorov_report(mu: &FiniteMeasure, nu: &FiniteMeasure, metric: &MetricSpec) -> Result<ProkhorovReport> {
    require_same_points(mu, nu)?;
    require_metric_fits(metric, mu)?;
    mu.require_probability()?;
    nu.require_probability()?;
    let mu_over_nu = one_sided(mu, nu, metric)?;
    let nu_over_mu = one_sided(nu, mu, metric)?;
    let distance = (&mu_over_nu).max(&nu_over_mu).clone();
    Ok(ProkhorovReport { mu_over_nu, nu_over_mu, distance })
}

/// One-sided infimum.
///
/// With `A^ε` the open neighbourhood, `ν(A^ε)` is constant for `ε` in each
/// piece `(d_i, d_{i+1}]` between consecutive distinct distances, where it
/// equals `ν` of the closed `d_i`-neighbourhood. So on that piece the
/// condition reads `F_i ≤ ε` with `F_i = max_A μ(A) − ν(N(A, d_i))`, and the
/// infimum over the piece is `max(d_i, F_i)` when that is at most `d_{i+1}`.
/// Only subsets of `μ`'s support matter. Never more than 1.
fn one_sided(mu: &FiniteMeasure, nu: &FiniteMeasure, metric: &MetricSpec) -> Result<Rational> {
    let support = mu.support();
    if support.len() > DISTANCE_SUPPORT_CAP {
        return Err(Error::SupportTooLarge { size: support.len(), cap: DISTANCE_SUPPORT_CAP });
    }
    let n = mu.len();
    let mut radii: Vec<Rational> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| metric.d(i, j).clone()).collect();
    radii.push(Rational::zero());
    radii.sort();
    radii.dedup();

    let mut best = Rational::one();
    for (idx, r) in radii.iter().enumerate() {
        if *r >= best {
            break;
        }
        let f = worst_excess(mu, nu, metric, &support, r);
        let candidate = r.max(&f).clone();
        let fits = match radii.get(idx + 1) {
            Some(next) => candidate <= *next,
            None => true,
        };
        if fits && candidate < best {
            best = candidate;
        }
    }
    Ok(best)
}

/// `max_A μ(A) − ν({y : d(y, A) ≤ r})` over subsets `A` of `support`.
fn worst_excess(mu: &FiniteMeasure, nu: &FiniteMeasure, metric: &MetricSpec, support: &[usize], r: &Rational) -> Rational {
    let n = mu.len();
    // neighbourhood masks fit in u32 once the support cap is checked; the
    // full point set may be larger, so use a bool vector for it
    let near: Vec<Vec<bool>> = support.iter().map(|&i| (0..n).map(|j| metric.d(i, j) <= r).collect()).collect();
    let s = support.len();
    let mut best = Rational::zero();
    let mut mu_a = vec![Rational::zero(); 1 << s];
    for a in 1usize..1 << s {
        let low = a.trailing_zeros() as usize;
        mu_a[a] = &mu_a[a & (a - 1)] + &mu.masses()[support[low]];
        let nu_nbhd: Rational = (0..n)
            .filter(|&j| (0..s).any(|b| a >> b & 1 == 1 && near[b][j]))
            .map(|j| nu.masses()[j].clone())
            .sum();
        let excess = &mu_a[a] - nu_nbhd;
        if excess > best {
            best = excess;
        }
    }
    best
}
