use std::fmt;

use serde::{Deserialize, Serialize};

use crate::num::{Interval, Rational};

/// Outcome of a check. Comparisons of an enclosure with an exact value are
/// inconclusive until the enclosure clears the value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Whether every value in `iv` is at most `bound`.
    pub fn at_most(iv: &Interval, bound: &Rational) -> Self {
        if iv.hi <= *bound {
            Verdict::Pass
        } else if iv.lo > *bound {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    }

    /// Refines `f(bits)` until [`Verdict::at_most`] is decided or `max_bits`
    /// is reached.
    pub fn at_most_refined(bound: &Rational, start_bits: u32, max_bits: u32, f: impl Fn(u32) -> Interval) -> (Self, Interval) {
        let mut bits = start_bits.max(1);
        loop {
            let iv = f(bits);
            let v = Verdict::at_most(&iv, bound);
            if v != Verdict::Inconclusive || bits >= max_bits {
                return (v, iv);
            }
            bits = (bits * 2).min(max_bits);
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}
