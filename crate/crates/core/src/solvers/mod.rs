//! Weighted low rank approximation solvers.
//!
//! Every solver targets the same objective, [`weighted_loss`]:
//! `Σ W²ᵢⱼ (Aᵢⱼ − Bᵢⱼ)²`. [`svd_w`] is the reweighted SVD; the others are
//! column subset selection, row-norm sampling and the iterative baselines.
//! [`run_solver`] wraps any of them with timing for the benchmark harness.

mod css;
mod em;
mod factored;
mod greedy;
mod sample;
mod suite;
mod svd_w;

pub use css::{css_column_count, css_wlra, CssSelection, CssSolution};
pub use em::{effective_weights, em_wlra, EM_DEFAULT_ITERS};
pub use factored::{factored_gd_wlra, factored_gradients, AdamConfig};
pub use greedy::greedy_wlra;
pub use sample::{row_norm_probs, sample_wlra, SampleResult};
pub use suite::{run_solver, SolverKind, SolverReport, SuiteConfig};
pub use svd_w::{hadamard_rank_check, plain_svd_baseline, svd_w, LraMethod, ReweightedSolution};

use crate::linalg::{LowRank, Matrix};
use crate::weights::WeightMatrix;
use crate::{Error, Result, Scalar};

/// Anything that can be evaluated entrywise as an `n × d` approximation.
pub trait Approximation<T: Scalar> {
    fn shape(&self) -> (usize, usize);

    fn entry(&self, i: usize, j: usize) -> T;

    fn to_dense(&self) -> Matrix<T> {
        let (n, d) = self.shape();
        Matrix::from_fn(n, d, |i, j| self.entry(i, j))
    }

    /// Per-entry residuals `Wᵢⱼ(Aᵢⱼ − Bᵢⱼ)` as a dense matrix, given the dense
    /// weight `w` and the dense input `a`.
    fn weighted_residual(&self, a: &Matrix<T>, w: &Matrix<T>) -> Result<Matrix<T>> {
        let b = self.to_dense();
        let diff = a.sub(&b)?;
        w.hadamard(&diff)
    }

    /// Fails when the approximation is tied to a weight other than `w`.
    fn check_weight(&self, _w: &Matrix<T>) -> Result<()> {
        Ok(())
    }
}

impl<T: Scalar> Approximation<T> for Matrix<T> {
    fn shape(&self) -> (usize, usize) {
        Matrix::shape(self)
    }

    fn entry(&self, i: usize, j: usize) -> T {
        self[(i, j)]
    }

    fn to_dense(&self) -> Matrix<T> {
        self.clone()
    }
}

impl<T: Scalar> Approximation<T> for LowRank<T> {
    fn shape(&self) -> (usize, usize) {
        LowRank::shape(self)
    }

    fn entry(&self, i: usize, j: usize) -> T {
        LowRank::entry(self, i, j)
    }

    fn to_dense(&self) -> Matrix<T> {
        LowRank::to_dense(self)
    }
}

/// `Σ W²ᵢⱼ (Aᵢⱼ − Bᵢⱼ)²`.
pub fn weighted_loss<T, W, B>(a: &Matrix<T>, w: &W, b: &B) -> Result<T>
where
    T: Scalar,
    W: WeightMatrix<T> + ?Sized,
    B: Approximation<T> + ?Sized,
{
    if w.shape() != a.shape() {
        return Err(Error::shape("weighted_loss weight", a.shape(), w.shape()));
    }
    if b.shape() != a.shape() {
        return Err(Error::shape(
            "weighted_loss approximation",
            a.shape(),
            b.shape(),
        ));
    }
    let wd = w.to_dense();
    b.check_weight(&wd)?;
    Ok(b.weighted_residual(a, &wd)?.frobenius_sq())
}

pub(crate) fn check_rank(k: usize, n: usize, d: usize, what: &str) -> Result<()> {
    let max = n.min(d);
    if k == 0 || k > max {
        return Err(Error::param(format!(
            "{what}: rank {k} outside 1..={max} for a {n}x{d} input"
        )));
    }
    Ok(())
}

pub(crate) fn dense_weight<T: Scalar, W: WeightMatrix<T> + ?Sized>(
    a: &Matrix<T>,
    w: &W,
) -> Result<Matrix<T>> {
    if w.shape() != a.shape() {
        return Err(Error::shape("weight", a.shape(), w.shape()));
    }
    let wd = w.to_dense();
    crate::weights::validate_weight(&wd)?;
    Ok(wd)
}
