use super::{svd, Matrix};
use crate::{Error, Result, Scalar};

/// Minimum-norm least squares `argmin ‖design·X − rhs‖_F` via the SVD.
///
/// Singular values below `ε·max(n, p)·σ₁` are treated as zero.
pub fn lstsq_min_norm<T: Scalar>(design: &Matrix<T>, rhs: &Matrix<T>) -> Result<Matrix<T>> {
    if design.rows() != rhs.rows() {
        return Err(Error::shape("lstsq", design.shape(), rhs.shape()));
    }
    let p = design.cols();
    if design.rows() == 0 || p == 0 {
        return Ok(Matrix::zeros(p, rhs.cols()));
    }
    let s = svd(design)?;
    let top = s.singular_values[0];
    let cutoff = top * T::epsilon() * T::of_usize(design.rows().max(p));
    let inv: Vec<T> = s
        .singular_values
        .iter()
        .map(|&x| {
            if x > cutoff && x > T::zero() {
                T::one() / x
            } else {
                T::zero()
            }
        })
        .collect();
    // X = Vᵀᵀ Σ⁺ Uᵀ rhs
    let coords = s.left.t_matmul(rhs)?.scale_rows(&inv);
    s.right.t_matmul(&coords)
}

/// Cholesky factor `L` of a symmetric positive definite matrix, or `None`
/// when a pivot falls below `ε·n·trace`.
fn cholesky<T: Scalar>(g: &Matrix<T>) -> Option<Matrix<T>> {
    let n = g.rows();
    let trace: T = (0..n).map(|i| g[(i, i)]).sum();
    let floor = trace * T::epsilon() * T::of_usize(n.max(1)) * T::of(16.0);
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = g[(j, j)];
        for t in 0..j {
            diag -= l[(j, t)] * l[(j, t)];
        }
        if diag <= floor {
            return None;
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut v = g[(i, j)];
            for t in 0..j {
                v -= l[(i, t)] * l[(j, t)];
            }
            l[(i, j)] = v / ljj;
        }
    }
    Some(l)
}

/// Solves `argmin_x Σᵢ wᵢ² (bᵢ − designᵢ·x)²` for one right-hand side.
///
/// Uses the normal equations with Cholesky when well posed and falls back
/// to the minimum-norm SVD solution otherwise.
pub fn weighted_lstsq<T: Scalar>(design: &Matrix<T>, weights: &[T], rhs: &[T]) -> Result<Vec<T>> {
    let (n, p) = design.shape();
    if weights.len() != n || rhs.len() != n {
        return Err(Error::shape(
            "weighted_lstsq",
            (n, 1),
            (rhs.len(), weights.len()),
        ));
    }
    let mut gram = Matrix::zeros(p, p);
    let mut moment = vec![T::zero(); p];
    for i in 0..n {
        let w2 = weights[i] * weights[i];
        if w2 == T::zero() {
            continue;
        }
        let row = design.row(i);
        for a in 0..p {
            let wa = w2 * row[a];
            moment[a] += wa * rhs[i];
            for b in a..p {
                gram[(a, b)] += wa * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
    }
    if let Some(l) = cholesky(&gram) {
        // forward then backward substitution
        let mut y = moment;
        for i in 0..p {
            let mut v = y[i];
            for t in 0..i {
                v -= l[(i, t)] * y[t];
            }
            y[i] = v / l[(i, i)];
        }
        for i in (0..p).rev() {
            let mut v = y[i];
            for t in i + 1..p {
                v -= l[(t, i)] * y[t];
            }
            y[i] = v / l[(i, i)];
        }
        return Ok(y);
    }
    let scaled = design.scale_rows(weights);
    let b = Matrix::from_fn(n, 1, |i, _| weights[i] * rhs[i]);
    Ok(lstsq_min_norm(&scaled, &b)?.into_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_norm_solution_of_underdetermined_system() {
        // x + y = 2 → min-norm (1, 1)
        let a = Matrix::<f64>::from_rows(&[[1.0, 1.0]]).unwrap();
        let b = Matrix::from_rows(&[[2.0]]).unwrap();
        let x = lstsq_min_norm(&a, &b).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-14 && (x[(1, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn weighted_fit_prefers_heavy_rows() {
        // fit a constant to (0, 10) with weights (1, 3): (0·1 + 10·9)/(1+9) = 9
        let a = Matrix::<f64>::from_rows(&[[1.0], [1.0]]).unwrap();
        let x = weighted_lstsq(&a, &[1.0, 3.0], &[0.0, 10.0]).unwrap();
        assert!((x[0] - 9.0).abs() < 1e-12);
    }

    #[test]
    fn singular_normal_equations_fall_back() {
        let a = Matrix::<f64>::from_rows(&[[1.0, 1.0], [2.0, 2.0]]).unwrap();
        let x = weighted_lstsq(&a, &[1.0, 1.0], &[2.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-10 && (x[1] - 1.0).abs() < 1e-10);
    }
}
