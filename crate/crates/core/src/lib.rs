//! Constructive extraction of large families of disjoint rainbow bases
//! from coloured base sequences of binary matroids.
//!
//! Given a rank-n binary matroid on n + k elements and a sequence of n
//! coloured bases, the extractor peels off rainbow bases one at a time:
//! each is found by matroid intersection on the residual coloured graph,
//! then re-routed along alternating paths until every uncovered element
//! keeps positive deficit and every deficit-critical flat of the rank-k
//! quotient is covered, and only then removed. Every step is re-checked by
//! direct rank computations, and the `oracle` module provides exact ground
//! truth at small scale.

pub mod chain;
pub mod error;
pub mod extract;
pub mod gf2;
pub mod graph;
pub mod intersect;
pub mod matroid;
pub mod oracle;
pub mod quotient;

pub use error::{Error, Result};
pub use extract::{extract_all, Certificate, ExtractConfig, Extraction, StopReason};
pub use graph::{ColouredGraph, Matching};
pub use matroid::{BaseSequence, BinaryMatroid, Instance};
pub use oracle::{exact_max_disjoint, gen_instance, verify_certificate, GenMode, InstanceSpec};
pub use quotient::QuotientMatroid;
