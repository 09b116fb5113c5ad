//! Sparse admissible prime sets and ternary representation counting.
//!
//! The library builds a residue system from a small prime basis (digit-base
//! covers lifted by CRT to a composite modulus), sieves the restricted
//! primes of a window [u, 2u], counts weighted and unweighted ordered
//! three-term representations of targets in [3u, 6u] by convolution,
//! reproduces the counts through uniform-node quadrature of the associated
//! exponential sum, and evaluates the arithmetic density factor exactly so
//! that measured counts can be compared with the predicted main term
//! `u^2 * sigma'(m)`.
//!
//! Modules map one-to-one onto the pipeline stages:
//!
//! - [`residue_system`]: basis, covers, CRT lift, dyadic gluing schedule
//! - [`triple_decomposition`]: constructive three-term witnesses mod p
//! - [`restricted_primes`]: segmented sieve, von Mangoldt window, filter
//! - [`representation_counts`]: convolution counting and the main-term profile
//! - [`circle_method`]: exponential sums, arcs, quadrature, diagnostics
//! - [`singular_series`]: exact local factors, Euler products, densities

pub mod arith;
pub mod circle_method;
mod error;
pub mod representation_counts;
pub mod residue_system;
pub mod restricted_primes;
pub mod singular_series;
pub mod triple_decomposition;

pub use circle_method::{ArcPartition, MinorArcReport, QuadratureGrid};
pub use error::{Error, Result};
pub use representation_counts::{ConvolutionStrategy, CountProfile};
pub use residue_system::{
    AdmissibleSystem, ConstructionParams, DigitBasis, DyadicSchedule, ResidueCover,
};
pub use restricted_primes::{SparsityReport, WeightedWindow};
pub use singular_series::{Bracketed, ExactRational, ResidueBasis};
