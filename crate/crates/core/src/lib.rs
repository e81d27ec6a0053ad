//! Weighted low rank approximation.
//!
//! The central solver, [`solvers::svd_w`], computes a rank `r·k` approximation
//! of `W∘A` and divides it entrywise by `W`. When `W` has rank `r`, the result
//! is a `(1+ε)`-approximate solution to the weighted problem
//! `min Σ W²ᵢⱼ (Aᵢⱼ − Bᵢⱼ)²` over rank-`k` matrices `B`, while storing only
//! `O((n + d)·r·k)` numbers plus the weights.
//!
//! Around it the crate provides:
//!
//! * [`linalg`]: a dense row-major matrix, one-sided Jacobi SVD, Householder
//!   QR and a randomized range finder.
//! * [`weights`]: dense, low-rank and structured (sparse plus disjoint rank-1
//!   blocks) weight matrices with fast entrywise-inverse application.
//! * [`solvers`]: `svd_w`, weighted column subset selection, row-norm sampling
//!   and the EM, greedy, adaptive-moment and plain SVD baselines.
//! * [`comm`]: bit-exact encoding of column-subset solutions and the
//!   block-diagonal lower-bound instances with secret recovery.
//! * [`data`]: seeded instance generators and matrix file I/O.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! `f64` aliases below are what the CLI and file formats use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comm;
pub mod data;
pub mod error;
pub mod linalg;
pub mod rng;
mod scalar;
pub mod solvers;
pub mod weights;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Row-major 64-bit dense matrix.
pub type DenseMatrix = linalg::Matrix<f64>;
/// Row-major 32-bit dense matrix.
pub type DenseMatrix32 = linalg::Matrix<f32>;
/// `left · right` factorization with 64-bit entries.
pub type LowRankPair = linalg::LowRank<f64>;
/// Truncated SVD with 64-bit entries.
pub type SvdResult = linalg::Svd<f64>;
/// Structured weight with 64-bit entries.
pub type StructuredWeight = weights::Structured<f64>;
/// Low-rank non-negative weight with 64-bit entries.
pub type LowRankWeight = weights::LowRankWeight<f64>;
