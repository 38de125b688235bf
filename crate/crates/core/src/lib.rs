//! Numerical core of `fedsignal`: everything needed to turn already-loaded
//! macro series, central-bank documents and rate decisions into feature
//! matrices, train the benchmark classifiers, score them and explain the
//! tree ensembles.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, HTTP and the
//! command line live in the companion `fedsignal` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod eval;
pub mod explain;
pub mod features;
pub mod math;
pub mod matrix;
pub mod models;
pub mod rng;
pub mod sampling;
pub mod text;
pub mod types;

pub use matrix::Matrix;
pub use types::{Class, DecisionRecord, DocType, DocumentRecord, FinbertProbRecord, MacroSeries};
