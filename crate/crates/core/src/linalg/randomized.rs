use super::{orthonormalize, svd, LowRank, Matrix};
use crate::rng;
use crate::{Error, Result, Scalar};

/// Extra Gaussian test vectors beyond the target rank.
pub const OVERSAMPLING: usize = 10;
/// Power iterations used for `eps ≥ e⁻²`; smaller `eps` adds `⌈ln(1/eps)⌉ − 2`.
pub const BASE_POWER_ITERATIONS: usize = 2;

/// Number of subspace iterations used for a target accuracy `eps`.
pub fn power_iterations(eps: f64) -> usize {
    let extra = (1.0 / eps).ln().ceil() as isize - BASE_POWER_ITERATIONS as isize;
    BASE_POWER_ITERATIONS + extra.max(0) as usize
}

/// Randomized rank-`k` approximation by a Gaussian range finder with
/// subspace iteration, followed by an exact SVD of the projected matrix.
///
/// Deterministic for a fixed `seed`.
pub fn randomized_lra<T: Scalar>(
    m: &Matrix<T>,
    k: usize,
    eps: f64,
    seed: u64,
) -> Result<LowRank<T>> {
    let (n, d) = m.shape();
    let max = n.min(d);
    if k == 0 || k > max {
        return Err(Error::param(format!(
            "randomized_lra rank {k} outside 1..={max}"
        )));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::param(format!("eps must lie in (0, 1], got {eps}")));
    }
    let sketch = (k + OVERSAMPLING).min(max);
    let mut g = rng::seeded(seed);
    let omega = Matrix::from_fn(d, sketch, |_, _| rng::normal::<T>(&mut g));
    let mut q = orthonormalize(&m.matmul(&omega)?);
    for _ in 0..power_iterations(eps) {
        let z = orthonormalize(&m.t_matmul(&q)?);
        q = orthonormalize(&m.matmul(&z)?);
    }
    let projected = q.t_matmul(m)?;
    let s = svd(&projected)?.truncate(k);
    let left = q.matmul(&s.left.scale_columns(&s.singular_values))?;
    LowRank::new(left, s.right)
}
