use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use super::{check_rank, dense_weight};
use crate::linalg::{svd, truncated_svd, weighted_lstsq, LowRank, Matrix};
use crate::rng;
use crate::weights::WeightMatrix;
use crate::{Error, Result, Scalar};

/// Output of [`sample_wlra`].
#[derive(Clone, Debug)]
pub struct SampleResult<T> {
    /// Weighted fit with every row in the span of the sampled rows.
    pub approx: Matrix<T>,
    /// Rank-`k` truncated SVD of `approx`.
    pub truncated: LowRank<T>,
    /// Sampled row indices in draw order, with repetitions.
    pub indices: Vec<usize>,
}

/// `pᵢ = ‖Aᵢ‖² / ‖A‖²_F`.
pub fn row_norm_probs<T: Scalar>(a: &Matrix<T>) -> Result<Vec<T>> {
    let norms: Vec<T> = (0..a.rows())
        .map(|i| a.row(i).iter().map(|&x| x * x).sum())
        .collect();
    let total: T = norms.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::Degenerate(
            "row-norm sampling of a zero matrix".into(),
        ));
    }
    Ok(norms.into_iter().map(|x| x / total).collect())
}

/// Row-norm sampling: draws `t` rows i.i.d. from [`row_norm_probs`], then
/// fits each row of `A` by weighted least squares onto their span.
pub fn sample_wlra<T, W>(
    a: &Matrix<T>,
    w: &W,
    k: usize,
    t: usize,
    seed: u64,
) -> Result<SampleResult<T>>
where
    T: Scalar,
    W: WeightMatrix<T> + ?Sized,
{
    let (n, d) = a.shape();
    check_rank(k, n, d, "sample_wlra")?;
    if t == 0 {
        return Err(Error::param("sample_wlra needs t ≥ 1"));
    }
    let w = dense_weight(a, w)?;
    let probs: Vec<f64> = row_norm_probs(a)?.into_iter().map(Scalar::as_f64).collect();
    let dist =
        WeightedIndex::new(&probs).map_err(|e| Error::Numerical(format!("row sampling: {e}")))?;
    let mut g = rng::seeded(seed);
    let indices: Vec<usize> = (0..t).map(|_| dist.sample(&mut g)).collect();

    let s = svd(&a.select_rows(&indices))?;
    let cutoff = s.singular_values[0] * T::epsilon() * T::of_usize(t.max(d));
    let rho = s.singular_values.iter().filter(|&&x| x > cutoff).count();
    let basis = s.right.first_rows(rho).transpose();

    let mut approx = Matrix::zeros(n, d);
    for i in 0..n {
        let coef = weighted_lstsq(&basis, w.row(i), a.row(i))?;
        let fit = basis.matvec(&coef)?;
        approx.row_mut(i).copy_from_slice(&fit);
    }
    let truncated = truncated_svd(&approx, k)?.into_low_rank();
    Ok(SampleResult {
        approx,
        truncated,
        indices,
    })
}
