//! Non-negative weight matrices.
//!
//! Every representation implements [`WeightMatrix`], which is what the
//! solvers consume. Dense matrices are weights as-is; [`LowRankWeight`]
//! stores `W = UV` with a non-negative product; [`Structured`] stores a
//! sparse correction plus rank-1 blocks on disjoint rectangles and applies
//! `W^{∘−1}∘(UV)` to a vector without materializing anything `n × d`.

mod families;
mod structured;

pub use families::{make_family, WeightFamily};
pub use structured::{
    inverse_weight_apply_vector, structured_rank_bound, InverseApplyStats, RankOneBlock,
    SparseEntry, Structured,
};

use crate::linalg::{LowRank, Matrix};
use crate::rng;
use crate::{Error, Result, Scalar};

/// Read access to a weight matrix.
pub trait WeightMatrix<T: Scalar> {
    fn shape(&self) -> (usize, usize);

    fn entry(&self, i: usize, j: usize) -> T;

    fn to_dense(&self) -> Matrix<T> {
        let (n, d) = self.shape();
        Matrix::from_fn(n, d, |i, j| self.entry(i, j))
    }

    /// Number of stored parameters.
    fn storage(&self) -> usize;

    /// `W ∘ A`.
    fn apply(&self, a: &Matrix<T>) -> Result<Matrix<T>> {
        if a.shape() != self.shape() {
            return Err(Error::shape("weight_apply", self.shape(), a.shape()));
        }
        self.to_dense().hadamard(a)
    }
}

impl<T: Scalar> WeightMatrix<T> for Matrix<T> {
    fn shape(&self) -> (usize, usize) {
        Matrix::shape(self)
    }

    fn entry(&self, i: usize, j: usize) -> T {
        self[(i, j)]
    }

    fn to_dense(&self) -> Matrix<T> {
        self.clone()
    }

    fn storage(&self) -> usize {
        self.rows() * self.cols()
    }

    fn apply(&self, a: &Matrix<T>) -> Result<Matrix<T>> {
        self.hadamard(a)
    }
}

/// `W ∘ A` for any weight representation.
pub fn weight_apply<T: Scalar, W: WeightMatrix<T> + ?Sized>(
    w: &W,
    a: &Matrix<T>,
) -> Result<Matrix<T>> {
    w.apply(a)
}

/// Reciprocal on the support of `w`, zero elsewhere.
#[inline]
pub fn support_inverse<T: Scalar>(w: T) -> T {
    if w > T::zero() {
        T::one() / w
    } else {
        T::zero()
    }
}

/// Negative slack tolerated when validating reconstructed low-rank weights.
pub const NONNEGATIVITY_SLACK: f64 = 1e-12;
/// Above this many entries low-rank weights are validated by sampling.
pub const FULL_VALIDATION_LIMIT: usize = 1_000_000;
pub const VALIDATION_SAMPLES: usize = 10_000;

/// Non-negative weight stored as a low-rank product.
#[derive(Clone, Debug)]
pub struct LowRankWeight<T> {
    factors: LowRank<T>,
}

impl<T: Scalar> LowRankWeight<T> {
    /// Validates non-negativity of the product: every entry when `n·d` is at
    /// most [`FULL_VALIDATION_LIMIT`], otherwise [`VALIDATION_SAMPLES`]
    /// entries drawn with a fixed seed.
    pub fn new(factors: LowRank<T>) -> Result<Self> {
        let (n, d) = factors.shape();
        let slack = -T::of(NONNEGATIVITY_SLACK);
        let check = |i: usize, j: usize| -> Result<()> {
            let v = factors.entry(i, j);
            if v < slack {
                return Err(Error::param(format!(
                    "low-rank weight has negative entry {v} at ({i}, {j})"
                )));
            }
            Ok(())
        };
        if n * d <= FULL_VALIDATION_LIMIT {
            let dense = factors.to_dense();
            for i in 0..n {
                for j in 0..d {
                    if dense[(i, j)] < slack {
                        check(i, j)?;
                    }
                }
            }
        } else {
            use rand::Rng;
            let mut g = rng::seeded(0x005e_ed0f_1a7e);
            for _ in 0..VALIDATION_SAMPLES {
                check(g.random_range(0..n), g.random_range(0..d))?;
            }
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &LowRank<T> {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.rank()
    }
}

impl<T: Scalar> WeightMatrix<T> for LowRankWeight<T> {
    fn shape(&self) -> (usize, usize) {
        self.factors.shape()
    }

    fn entry(&self, i: usize, j: usize) -> T {
        self.factors.entry(i, j).max(T::zero())
    }

    fn to_dense(&self) -> Matrix<T> {
        self.factors.to_dense().map(|v| v.max(T::zero()))
    }

    fn storage(&self) -> usize {
        self.factors.param_count()
    }
}

/// Checks that a weight is entrywise non-negative and not identically zero.
pub fn validate_weight<T: Scalar>(w: &Matrix<T>) -> Result<()> {
    if let Some(pos) = w.as_slice().iter().position(|&v| v < T::zero()) {
        let d = w.cols().max(1);
        return Err(Error::param(format!(
            "weights must be non-negative; found {} at ({}, {})",
            w.as_slice()[pos],
            pos / d,
            pos % d
        )));
    }
    if w.as_slice().iter().all(|&v| v == T::zero()) {
        return Err(Error::Degenerate(
            "weight matrix is zero everywhere; every output is vacuously optimal".into(),
        ));
    }
    Ok(())
}
