//! Monte Carlo evaluation of `exp(beta A) v` for symmetric matrices that
//! split as `A = D - L`, with `D` diagonal and `L` a graph Laplacian.
//!
//! The chain generated by `-L` is sampled over `N` segments of length
//! `dt = beta / N`; weights from `D` are accumulated along each path, and
//! averaging the resulting multiplicative functional gives single entries,
//! the whole vector, or total communicability of the Lie or Strang splitting
//! approximation. A dense oracle provides the exact references used to
//! separate splitting error from statistical error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimator;
pub mod generators;
pub mod graph;
pub mod metrics;
pub mod oracle;
pub mod sampler;

pub use error::{Error, Result};
pub use estimator::{entry_estimate, tc_estimate, vector_estimate, Estimate, PathParams, Splitting, VectorEstimate};
pub use generators::{generate, GenKind, GenSpec};
pub use graph::{load_matrix_market, split, stats, write_matrix_market, GraphStats, SparseSymmetric, SplitMatrix};
pub use metrics::{isim, loglog_slope, normalized_tc, rank, resolve_beta, BetaRule, RankedVector};
pub use oracle::{
    commutator_bounds, decompose_error, dense_expm, exact_action, splitting_product, DenseMatrix, ErrorDecomposition,
    Norm,
};
pub use sampler::{advance, exp_time, jump, PathSegmentResult, RngStream, SegmentSampler};
