//! Resource-bounded complexities read off an [`EnumerationCache`], and the
//! counting statistics of description length.
//!
//! Every value here is relative to the cache's window: a program longer than
//! `max_len`, or one needing more than `budget` steps, is invisible. Values
//! therefore only ever decrease as the window grows. "No program found" is
//! `None`, never a number.

use num_bigint::BigInt;

use super::{EnumerationCache, Lab, MachineMode};
use crate::bits::BitString;
use crate::codec::beta;
use crate::error::{Error, Result};
use crate::num::{Dyadic, Rational};

fn require_mode(cache: &EnumerationCache, mode: MachineMode) -> Result<()> {
    if cache.mode() != mode {
        return Err(Error::Domain(format!("needs a {mode} cache, got {}", cache.mode())));
    }
    Ok(())
}

fn require_len(cache: &EnumerationCache, n: usize) -> Result<()> {
    if n > cache.max_len() {
        return Err(Error::Domain(format!(
            "length {n} is outside the enumerated window (max_len {})",
            cache.max_len()
        )));
    }
    Ok(())
}

/// Shortest self-delimiting description of `x` within the window.
pub fn complexity_k(cache: &EnumerationCache, x: &BitString) -> Result<Option<usize>> {
    require_mode(cache, MachineMode::SelfDelimiting)?;
    Ok(cache.shortest(x))
}

/// Shortest end-marked description of `x` within the window.
pub fn complexity_c(cache: &EnumerationCache, x: &BitString) -> Result<Option<usize>> {
    require_mode(cache, MachineMode::EndMarked)?;
    Ok(cache.shortest(x))
}

/// `|x| − C(x | β(|x|))`, from an end-marked cache run on condition `β(|x|)`.
///
/// A lower bound on the unbounded deficiency, since `C` can only shrink as
/// the window grows.
pub fn d0(cache: &EnumerationCache, x: &BitString) -> Result<Option<i64>> {
    let cond = beta(x.len() as u64);
    if cache.condition() != &cond {
        return Err(Error::Domain(format!(
            "d0 of a length-{} string needs condition {cond}, cache has {}",
            x.len(),
            cache.condition()
        )));
    }
    Ok(complexity_c(cache, x)?.map(|c| x.len() as i64 - c as i64))
}

/// Number of strings with a description of length at most `u`.
pub fn stats_count_below(cache: &EnumerationCache, u: usize) -> Result<usize> {
    require_len(cache, u)?;
    Ok(cache.shortest_table().values().filter(|&&k| k <= u).count())
}

/// Number of domain programs of length exactly `n` with output `x`.
pub fn stats_fxn(cache: &EnumerationCache, x: &BitString, n: usize) -> Result<usize> {
    require_len(cache, n)?;
    Ok(cache.domain().filter(|(p, o)| p.len() == n && &o.output == x).count())
}

/// Number of domain programs of length exactly `n`.
pub fn stats_dn(cache: &EnumerationCache, n: usize) -> Result<usize> {
    require_len(cache, n)?;
    Ok(cache.domain().filter(|(p, _)| p.len() == n).count())
}

/// Number of strings whose shortest description has length exactly `n`.
pub fn stats_gn(cache: &EnumerationCache, n: usize) -> usize {
    cache.shortest_table().values().filter(|&&k| k == n).count()
}

/// Moving average of [`stats_gn`] over `n − c ..= n + c`; indices below zero
/// count as empty.
pub fn stats_hn(cache: &EnumerationCache, n: usize, c: usize) -> Rational {
    let total: usize = (n as i64 - c as i64..=(n + c) as i64)
        .filter(|&i| i >= 0)
        .map(|i| stats_gn(cache, i as usize))
        .sum();
    Rational::new(BigInt::from(total), BigInt::from(2 * c + 1))
}

/// Exact `Σ 2^(−|p|)` over the domain.
pub fn domain_kraft_sum(cache: &EnumerationCache) -> Dyadic {
    cache.domain().map(|(p, _)| Dyadic::pow2_neg(p.len() as u64)).sum()
}

/// `max_{k ≤ n} K(β(k))`, or `None` if any of those is undefined.
pub fn kplus(cache: &EnumerationCache, n: u64) -> Result<Option<usize>> {
    require_mode(cache, MachineMode::SelfDelimiting)?;
    let mut best = 0;
    for k in 0..=n {
        match cache.shortest(&beta(k)) {
            Some(v) => best = best.max(v),
            None => return Ok(None),
        }
    }
    Ok(Some(best))
}

impl Lab {
    pub fn k(&self, x: &BitString, condition: &BitString) -> Option<usize> {
        self.cache(MachineMode::SelfDelimiting, condition).shortest(x)
    }

    pub fn c(&self, x: &BitString, condition: &BitString) -> Option<usize> {
        self.cache(MachineMode::EndMarked, condition).shortest(x)
    }

    pub fn d0(&self, x: &BitString) -> Option<i64> {
        let cache = self.cache(MachineMode::EndMarked, &beta(x.len() as u64));
        d0(&cache, x).expect("condition matches by construction")
    }
}
