use super::{check_rank, dense_weight, weighted_loss};
use crate::linalg::{svd, weighted_lstsq, LowRank, Matrix};
use crate::weights::WeightMatrix;
use crate::Result;
use crate::Scalar;

/// Greedy rank-1 pursuit along the top singular directions of the gradient
/// `W∘W∘(A − B)`, each step followed by one refit of the right factor by
/// per-column weighted least squares.
///
/// The trace starts at the loss of `B = 0` and has one entry per added rank.
/// Directions entirely outside the support of `W` are skipped; when no usable
/// direction remains the new factor column is zero.
pub fn greedy_wlra<T, W>(a: &Matrix<T>, w: &W, k: usize) -> Result<(LowRank<T>, Vec<T>)>
where
    T: Scalar,
    W: WeightMatrix<T> + ?Sized,
{
    let (n, d) = a.shape();
    check_rank(k, n, d, "greedy_wlra")?;
    let w = dense_weight(a, w)?;
    let w2 = w.hadamard(&w)?;
    let mut u = Matrix::zeros(n, 0);
    let mut v = Matrix::zeros(0, d);
    let mut b = Matrix::zeros(n, d);
    let mut trace = vec![weighted_loss(a, &w, &b)?];
    for _ in 0..k {
        let resid = a.sub(&b)?;
        let grad = w2.hadamard(&resid)?;
        let s = svd(&grad)?;
        let mut step = None;
        for t in 0..s.len() {
            if s.singular_values[t] <= T::zero() {
                break;
            }
            let ut = s.left.column(t);
            let vt = s.right.row(t);
            let (mut num, mut den) = (T::zero(), T::zero());
            for i in 0..n {
                for j in 0..d {
                    let uv = ut[i] * vt[j];
                    num += grad[(i, j)] * uv;
                    den += w2[(i, j)] * uv * uv;
                }
            }
            if den > T::zero() {
                step = Some((ut, num / den));
                break;
            }
        }
        let (ut, alpha) = step.unwrap_or_else(|| (vec![T::zero(); n], T::zero()));
        u = u.hstack(&Matrix::from_fn(n, 1, |i, _| alpha * ut[i]))?;
        // (V; vᵀ) is feasible for the refit, so the loss cannot increase
        v = refit_right(a, &w, &u)?;
        b = u.matmul(&v)?;
        trace.push(weighted_loss(a, &w, &b)?);
    }
    Ok((LowRank::new(u, v)?, trace))
}

/// `V[:, j] = argmin_x Σᵢ Wᵢⱼ² (Aᵢⱼ − Uᵢ·x)²` for every column `j`.
fn refit_right<T: Scalar>(a: &Matrix<T>, w: &Matrix<T>, u: &Matrix<T>) -> Result<Matrix<T>> {
    let (k, d) = (u.cols(), a.cols());
    let mut v = Matrix::zeros(k, d);
    for j in 0..d {
        let x = weighted_lstsq(u, &w.column(j), &a.column(j))?;
        for (t, xt) in x.into_iter().enumerate() {
            v[(t, j)] = xt;
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::tail_energy;
    use crate::rng;

    fn gaussian(n: usize, d: usize, g: &mut rng::WlraRng) -> Matrix<f64> {
        Matrix::from_fn(n, d, |_, _| rng::normal(g))
    }

    #[test]
    fn unweighted_rank_one_is_top_triple() {
        let mut g = rng::seeded(1);
        let a = gaussian(9, 7, &mut g);
        let (f, trace) = greedy_wlra(&a, &Matrix::filled(9, 7, 1.0), 1).unwrap();
        let tail = tail_energy(&a, 1).unwrap();
        assert!((trace[1] - tail).abs() <= 1e-9 * tail);
        assert_eq!(f.rank(), 1);
    }

    #[test]
    fn rank_one_input_is_recovered_under_uniform_weight() {
        let mut g = rng::seeded(2);
        let a = gaussian(8, 1, &mut g)
            .matmul(&gaussian(1, 6, &mut g))
            .unwrap();
        let (_, trace) = greedy_wlra(&a, &Matrix::filled(8, 6, 2.5), 1).unwrap();
        assert!(trace[1] <= 1e-12 * trace[0]);
        // a non-uniform weight tilts the first direction away from A's column
        // space; the single right-factor refit still improves on B = 0
        let w = Matrix::from_fn(8, 6, |_, _| rng::uniform(&mut g, 0.2, 2.0));
        let (_, trace) = greedy_wlra(&a, &w, 1).unwrap();
        assert!(trace[1] < trace[0]);
    }

    #[test]
    fn trace_is_monotone() {
        let mut g = rng::seeded(3);
        let a = gaussian(20, 15, &mut g);
        let w = Matrix::from_fn(20, 15, |_, _| rng::uniform(&mut g, 0.0, 2.0));
        let (f, trace) = greedy_wlra(&a, &w, 5).unwrap();
        assert_eq!(trace.len(), 6);
        assert_eq!(f.rank(), 5);
        for p in trace.windows(2) {
            assert!(p[1] <= p[0] + 1e-9 * p[0]);
        }
    }

    #[test]
    fn zero_weight_rows_are_ignored() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [5.0, 7.0]]).unwrap();
        let w = Matrix::from_rows(&[[1.0, 1.0], [0.0, 0.0]]).unwrap();
        let (_, trace) = greedy_wlra(&a, &w, 2).unwrap();
        assert!(trace[1] <= 1e-20);
        assert!(trace[2] <= 1e-20);
    }
}
