//! Exact, finite-window experiments with Kolmogorov complexity, algorithmic
//! probability and randomness tests on a small concrete machine.
//!
//! The guide in `book/` walks through each module with runnable examples.

pub mod bits;
pub mod codec;
pub mod error;
pub mod harness;
pub mod machine;
pub mod measures;
pub mod num;
pub mod randomness;
pub mod semimeasure;
pub mod verdict;

pub use bits::BitString;
pub use error::{Error, Result};
pub use num::{Dyadic, Interval, Rational};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/numbers.md")]
    pub struct Numbers;
    #[doc = include_str!("../../../book/src/codes.md")]
    pub struct Codes;
    #[doc = include_str!("../../../book/src/machine.md")]
    pub struct Machine;
    #[doc = include_str!("../../../book/src/semimeasures.md")]
    pub struct Semimeasures;
    #[doc = include_str!("../../../book/src/randomness.md")]
    pub struct Randomness;
    #[doc = include_str!("../../../book/src/measures.md")]
    pub struct Measures;
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub struct Experiments;
}
