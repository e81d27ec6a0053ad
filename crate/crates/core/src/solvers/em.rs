use super::{check_rank, dense_weight, weighted_loss, Approximation};
use crate::linalg::{truncated_svd, LowRank, Matrix};
use crate::weights::WeightMatrix;
use crate::{Error, Result, Scalar};

pub const EM_DEFAULT_ITERS: usize = 25;

/// `Ŵ = W² / max(W²)`, entrywise in `[0, 1]`.
pub fn effective_weights<T: Scalar>(w: &Matrix<T>) -> Result<Matrix<T>> {
    let top = w.max_abs();
    if top == T::zero() {
        return Err(Error::Degenerate("weight matrix is zero everywhere".into()));
    }
    Ok(w.map(|v| (v / top) * (v / top)))
}

/// Fill-in EM: `X ← Ŵ∘A + (1 − Ŵ)∘B`, `B ← SVD_k(X)`, repeated `iters` times.
///
/// Starts from `init` when given, otherwise from `SVD_k(Ŵ∘A)`. The trace has
/// `iters + 1` entries: the weighted loss of the starting point, then after
/// each iteration. Monotone whenever the starting point has rank at most `k`.
pub fn em_wlra<T: Scalar, W: WeightMatrix<T> + ?Sized>(
    a: &Matrix<T>,
    w: &W,
    k: usize,
    iters: usize,
    init: Option<&dyn Approximation<T>>,
) -> Result<(LowRank<T>, Vec<T>)> {
    let (n, d) = a.shape();
    check_rank(k, n, d, "em_wlra")?;
    if iters == 0 {
        return Err(Error::param("em_wlra needs at least one iteration"));
    }
    let w = dense_weight(a, w)?;
    let what = effective_weights(&w)?;
    let mut b = match init {
        Some(b0) => {
            if b0.shape() != (n, d) {
                return Err(Error::shape("em_wlra init", (n, d), b0.shape()));
            }
            b0.to_dense()
        }
        None => truncated_svd(&what.hadamard(a)?, k)?.reconstruct(),
    };
    let mut trace = Vec::with_capacity(iters + 1);
    trace.push(weighted_loss(a, &w, &b)?);
    let mut factors = LowRank::zero(n, d);
    for _ in 0..iters {
        let mut x = b;
        for ((xv, &av), &hv) in x
            .as_mut_slice()
            .iter_mut()
            .zip(a.as_slice())
            .zip(what.as_slice())
        {
            *xv = hv * av + (T::one() - hv) * *xv;
        }
        factors = truncated_svd(&x, k)?.into_low_rank();
        b = factors.to_dense();
        trace.push(weighted_loss(a, &w, &b)?);
    }
    Ok((factors, trace))
}
