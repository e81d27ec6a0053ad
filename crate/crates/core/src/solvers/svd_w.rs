use super::{check_rank, dense_weight, Approximation};
use crate::linalg::{
    hadamard, numerical_rank, randomized_lra, truncated_svd, LowRank, Matrix, RANK_TOLERANCE,
};
use crate::weights::{support_inverse, WeightMatrix};
use crate::{Error, Result, Scalar};

/// How the rank `r·k` approximation of `W∘A` is computed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LraMethod {
    Exact,
    Randomized { eps: f64, seed: u64 },
}

/// `W^{∘−1} ∘ Ã_W`, kept in factored form next to the weight it divides by.
#[derive(Clone, Debug)]
pub struct ReweightedSolution<'w, T, W: ?Sized> {
    pub weight: &'w W,
    pub tilde_aw: LowRank<T>,
}

impl<T: Scalar, W: WeightMatrix<T> + ?Sized> ReweightedSolution<'_, T, W> {
    /// `(n + d)·rank(Ã_W)` plus the storage of the weight.
    pub fn param_count(&self) -> usize {
        self.tilde_aw.param_count() + self.weight.storage()
    }
}

impl<T: Scalar, W: WeightMatrix<T> + ?Sized> Approximation<T> for ReweightedSolution<'_, T, W> {
    fn shape(&self) -> (usize, usize) {
        self.tilde_aw.shape()
    }

    fn entry(&self, i: usize, j: usize) -> T {
        self.tilde_aw.entry(i, j) * support_inverse(self.weight.entry(i, j))
    }

    fn to_dense(&self) -> Matrix<T> {
        self.tilde_aw
            .to_dense()
            .zip_map(&self.weight.to_dense(), |t, w| t * support_inverse(w))
            .expect("weight and factors share a shape")
    }

    /// `W∘A − Ã_W` on the support of `W`, zero elsewhere.
    fn weighted_residual(&self, a: &Matrix<T>, w: &Matrix<T>) -> Result<Matrix<T>> {
        let wa = w.hadamard(a)?;
        let t = self.tilde_aw.to_dense();
        let mut out = wa.sub(&t)?;
        for (o, &wij) in out.as_mut_slice().iter_mut().zip(w.as_slice()) {
            if wij <= T::zero() {
                *o = T::zero();
            }
        }
        Ok(out)
    }

    fn check_weight(&self, w: &Matrix<T>) -> Result<()> {
        if self.weight.to_dense() != *w {
            return Err(Error::param(
                "reweighted solution was computed for a different weight matrix",
            ));
        }
        Ok(())
    }
}

/// Reweighted SVD: a rank `r·k` approximation `Ã_W` of `W∘A`, returned as
/// `W^{∘−1}∘Ã_W`.
///
/// With `LraMethod::Exact` the weighted loss equals `tail_energy(W∘A, r·k)`
/// whenever `W` is entrywise positive, which is at most the loss of every
/// rank-`k` matrix when `rank(W) ≤ r`.
pub fn svd_w<'w, T, W>(
    a: &Matrix<T>,
    w: &'w W,
    r: usize,
    k: usize,
    method: LraMethod,
) -> Result<ReweightedSolution<'w, T, W>>
where
    T: Scalar,
    W: WeightMatrix<T> + ?Sized,
{
    let (n, d) = a.shape();
    if r == 0 {
        return Err(Error::param("weight rank bound must be positive"));
    }
    let rk = r
        .checked_mul(k)
        .ok_or_else(|| Error::param("r·k overflows"))?;
    check_rank(rk, n, d, "svd_w (r·k)")?;
    dense_weight(a, w)?;
    let m = w.apply(a)?;
    let tilde_aw = match method {
        LraMethod::Exact => truncated_svd(&m, rk)?.into_low_rank(),
        LraMethod::Randomized { eps, seed } => randomized_lra(&m, rk, eps, seed)?,
    };
    Ok(ReweightedSolution {
        weight: w,
        tilde_aw,
    })
}

/// Numerical rank of `W∘A'`, at most `rank(W)·rank(A')`.
pub fn hadamard_rank_check<T: Scalar>(w: &Matrix<T>, ap: &Matrix<T>) -> Result<usize> {
    numerical_rank(&hadamard(w, ap)?, T::of(RANK_TOLERANCE))
}

/// Rank-`k` truncated SVD of `A`, ignoring the weights.
pub fn plain_svd_baseline<T: Scalar>(a: &Matrix<T>, k: usize) -> Result<LowRank<T>> {
    Ok(truncated_svd(a, k)?.into_low_rank())
}
