//! Exact and numerical tools for non-archimedean and hybrid pluripotential
//! theory on degenerations over the punctured disk.
//!
//! The crate is organised bottom-up:
//!
//! * [`exact`]: rationals, symbolic logarithm forms, certified comparisons;
//! * [`valuation`]: Laurent data and quasi-monomial / Gauss valuations;
//! * [`dual_complex`]: snc model combinatorics, skeleta and retractions;
//! * [`tropical`]: tropical Fubini-Study metrics and their non-archimedean limits;
//! * [`hybrid`]: the hybrid circle, path limits and Lelong numbers;
//! * [`monge_ampere`]: atomic, piecewise-affine and grid Monge-Ampère measures;
//! * [`mz_tree`]: functions on the Berkovich spectrum of the integers.

pub mod dual_complex;
pub mod error;
pub mod exact;
pub mod hybrid;
pub mod monge_ampere;
pub mod mz_tree;
pub mod tropical;
pub mod valuation;

pub use error::{Error, Result};
pub use exact::{LogAffine, LogQ, LogScale, Q};
