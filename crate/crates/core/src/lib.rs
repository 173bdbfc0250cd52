//! Pseudo-random elements of finite black box groups.
//!
//! The [`cube`] module builds a Fibonacci cube whose sampler returns
//! `R_t⁻¹ R̄_t`; [`uniformizer`] turns that semi-uniform source into an
//! ε-uniform one. The [`oracle`] computes exact output distributions on
//! small enumerated groups, and [`stats`] runs chi-square experiments over
//! cycle-type partitions.

pub mod cube;
pub mod error;
pub mod group;
pub mod oracle;
pub mod prodrepl;
pub mod random;
pub mod stats;
pub mod uniformizer;

pub use error::{Error, Result};
