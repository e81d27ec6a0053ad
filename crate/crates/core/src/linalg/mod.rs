//! Dense linear algebra: matrices, SVD, QR, least squares and randomized
//! low rank approximation.

mod lstsq;
mod matrix;
mod qr;
mod randomized;
mod svd;

pub use lstsq::{lstsq_min_norm, weighted_lstsq};
pub use matrix::{dot, frobenius_dist_sq, Matrix};
pub use qr::{orthonormalize, pivoted_qr_columns};
pub use randomized::{power_iterations, randomized_lra, BASE_POWER_ITERATIONS, OVERSAMPLING};
pub use svd::{numerical_rank, svd, tail_energy, truncated_svd, Svd, RANK_TOLERANCE};

use crate::{Error, Result, Scalar};

/// Entrywise product of two equal-shaped matrices.
pub fn hadamard<T: Scalar>(p: &Matrix<T>, q: &Matrix<T>) -> Result<Matrix<T>> {
    p.hadamard(q)
}

/// A matrix stored as `left (n×k) · right (k×d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowRank<T> {
    left: Matrix<T>,
    right: Matrix<T>,
}

impl<T: Scalar> LowRank<T> {
    pub fn new(left: Matrix<T>, right: Matrix<T>) -> Result<Self> {
        if left.cols() != right.rows() {
            return Err(Error::shape(
                "low-rank factors",
                (left.rows(), right.rows()),
                left.shape(),
            ));
        }
        Ok(Self { left, right })
    }

    /// The all-zero `n × d` matrix as a rank-0 pair.
    pub fn zero(n: usize, d: usize) -> Self {
        Self {
            left: Matrix::zeros(n, 0),
            right: Matrix::zeros(0, d),
        }
    }

    pub fn left(&self) -> &Matrix<T> {
        &self.left
    }

    pub fn right(&self) -> &Matrix<T> {
        &self.right
    }

    pub fn into_parts(self) -> (Matrix<T>, Matrix<T>) {
        (self.left, self.right)
    }

    /// Inner dimension `k`.
    pub fn rank(&self) -> usize {
        self.left.cols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.left.rows(), self.right.cols())
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> T {
        let mut acc = T::zero();
        for (t, &u) in self.left.row(i).iter().enumerate() {
            acc += u * self.right[(t, j)];
        }
        acc
    }

    pub fn to_dense(&self) -> Matrix<T> {
        self.left
            .matmul(&self.right)
            .expect("factors conformable by construction")
    }

    /// `(n + d)·k`.
    pub fn param_count(&self) -> usize {
        let (n, d) = self.shape();
        (n + d) * self.rank()
    }
}
