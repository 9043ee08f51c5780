//! Fix-locus localization for apps broken by a framework upgrade.
//!
//! A baseline trace (old framework) and a failure trace (new framework) of
//! the same scenario are diffed into suspicious invocation blocks. The
//! stacks of those blocks form a failure call tree whose application
//! methods are ranked by suspiciousness. Naive trace inspection and Ochiai
//! are provided for comparison, along with a synthetic benchmark.

pub mod baselines;
pub mod bench;
pub mod cli;
pub mod diff;
pub mod error;
pub mod fixtures;
pub mod rank;
pub mod sib;
pub mod trace;
pub mod tree;

pub use error::{Error, Result};
