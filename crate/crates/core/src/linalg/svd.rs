use std::cmp::Ordering;

use super::{dot, LowRank, Matrix};
use crate::{Error, Result, Scalar};

const MAX_SWEEPS: usize = 80;

/// Thin singular value decomposition `left · diag(σ) · right`.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    /// `n × p`, orthonormal columns.
    pub left: Matrix<T>,
    /// Length `p`, non-increasing, non-negative.
    pub singular_values: Vec<T>,
    /// `p × d`, orthonormal rows.
    pub right: Matrix<T>,
}

impl<T: Scalar> Svd<T> {
    pub fn len(&self) -> usize {
        self.singular_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.singular_values.is_empty()
    }

    /// Keeps the leading `k` triples.
    pub fn truncate(mut self, k: usize) -> Self {
        let k = k.min(self.len());
        self.left = self.left.first_columns(k);
        self.right = self.right.first_rows(k);
        self.singular_values.truncate(k);
        self
    }

    /// `(left · diag(σ), right)`.
    pub fn into_low_rank(self) -> LowRank<T> {
        let left = self.left.scale_columns(&self.singular_values);
        LowRank::new(left, self.right).expect("svd factors are conformable")
    }

    pub fn reconstruct(&self) -> Matrix<T> {
        self.left
            .scale_columns(&self.singular_values)
            .matmul(&self.right)
            .expect("svd factors are conformable")
    }
}

/// Full thin SVD by one-sided (Hestenes) Jacobi.
///
/// Columns of the taller orientation are rotated pairwise until every pair is
/// orthogonal to `tol = ε·rows` relative to the product of their norms.
/// Singular vectors for numerically zero singular values are completed to an
/// orthonormal set.
pub fn svd<T: Scalar>(m: &Matrix<T>) -> Result<Svd<T>> {
    if m.rows() < m.cols() {
        let t = svd(&m.transpose())?;
        return Ok(Svd {
            left: t.right.transpose(),
            singular_values: t.singular_values,
            right: t.left.transpose(),
        });
    }
    let (n, p) = m.shape();
    // column-major working copy
    let mut a = vec![T::zero(); n * p];
    for i in 0..n {
        for (j, &v) in m.row(i).iter().enumerate() {
            a[j * n + i] = v;
        }
    }
    let mut v = vec![T::zero(); p * p];
    for j in 0..p {
        v[j * p + j] = T::one();
    }

    let tol = T::epsilon() * T::of_usize(n.max(1));
    let tiny = T::min_positive_value().sqrt();
    let mut converged = p < 2;
    let mut last_off = T::zero();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        last_off = T::zero();
        for jp in 0..p {
            for jq in jp + 1..p {
                let (head, tail) = a.split_at_mut(jq * n);
                let cp = &mut head[jp * n..(jp + 1) * n];
                let cq = &mut tail[..n];
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = T::zero();
                for (&x, &y) in cp.iter().zip(cq.iter()) {
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if alpha <= tiny || beta <= tiny || gamma == T::zero() {
                    continue;
                }
                let off = gamma.abs() / (alpha.sqrt() * beta.sqrt());
                if off > last_off {
                    last_off = off;
                }
                if off <= tol {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma + gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(T::one()));
                let c = T::one() / t.hypot(T::one());
                let s = c * t;
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
                let (vh, vt) = v.split_at_mut(jq * p);
                let vp = &mut vh[jp * p..(jp + 1) * p];
                let vq = &mut vt[..p];
                for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "jacobi svd of {n}x{p} did not converge in {MAX_SWEEPS} sweeps \
             (largest relative off-diagonal {last_off:e})"
        )));
    }

    let norms: Vec<T> = (0..p)
        .map(|j| dot(&a[j * n..(j + 1) * n], &a[j * n..(j + 1) * n]).sqrt())
        .collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap_or(Ordering::Equal));

    let sigma_max = order.first().map_or(T::zero(), |&j| norms[j]);
    let cutoff = sigma_max * T::epsilon() * T::of_usize(n.max(p));
    let mut left = Matrix::zeros(n, p);
    let mut right = Matrix::zeros(p, p);
    let mut singular_values = Vec::with_capacity(p);
    let mut deficient = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        let s = norms[j];
        singular_values.push(s);
        if s > cutoff && s > T::zero() {
            for i in 0..n {
                left[(i, slot)] = a[j * n + i] / s;
            }
        } else {
            deficient.push(slot);
        }
        right.row_mut(slot).copy_from_slice(&v[j * p..(j + 1) * p]);
    }
    if !deficient.is_empty() {
        complete_orthonormal_columns(&mut left, &deficient);
    }
    Ok(Svd {
        left,
        singular_values,
        right,
    })
}

/// Fills the listed columns of `q` with unit vectors orthogonal to all other
/// columns. Each new vector starts from the standard basis vector with the
/// largest residual after projecting out the current columns.
fn complete_orthonormal_columns<T: Scalar>(q: &mut Matrix<T>, slots: &[usize]) {
    let n = q.rows();
    let mut filled: Vec<usize> = (0..q.cols()).filter(|j| !slots.contains(j)).collect();
    for &slot in slots {
        let residual =
            |i: usize| T::one() - filled.iter().map(|&j| q[(i, j)] * q[(i, j)]).sum::<T>();
        let best = (0..n)
            .max_by(|&a, &b| {
                residual(a)
                    .partial_cmp(&residual(b))
                    .unwrap_or(Ordering::Equal)
            })
            .expect("non-empty column");
        let mut w = vec![T::zero(); n];
        w[best] = T::one();
        for _ in 0..2 {
            for &j in &filled {
                let proj: T = (0..n).map(|i| q[(i, j)] * w[i]).sum();
                for (i, wi) in w.iter_mut().enumerate() {
                    *wi -= proj * q[(i, j)];
                }
            }
        }
        let norm = dot(&w, &w).sqrt();
        for (i, wi) in w.iter().enumerate() {
            q[(i, slot)] = *wi / norm;
        }
        filled.push(slot);
    }
}

/// Top-`k` singular triples of `m`.
pub fn truncated_svd<T: Scalar>(m: &Matrix<T>, k: usize) -> Result<Svd<T>> {
    let max = m.rows().min(m.cols());
    if k == 0 || k > max {
        return Err(Error::param(format!(
            "truncated_svd rank {k} outside 1..={max} for {}x{} input",
            m.rows(),
            m.cols()
        )));
    }
    Ok(svd(m)?.truncate(k))
}

/// `‖M − M_k‖²_F = Σ_{i>k} σᵢ²`.
pub fn tail_energy<T: Scalar>(m: &Matrix<T>, k: usize) -> Result<T> {
    let max = m.rows().min(m.cols());
    if k > max {
        return Err(Error::param(format!(
            "tail_energy rank {k} exceeds min dimension {max}"
        )));
    }
    if k == 0 {
        return Ok(m.frobenius_sq());
    }
    let s = svd(m)?;
    Ok(s.singular_values[k..].iter().map(|&x| x * x).sum())
}

/// Number of singular values above `rel · σ₁`.
pub fn numerical_rank<T: Scalar>(m: &Matrix<T>, rel: T) -> Result<usize> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(0);
    }
    let s = svd(m)?;
    let top = s.singular_values[0];
    if top == T::zero() {
        return Ok(0);
    }
    Ok(s.singular_values.iter().filter(|&&x| x > rel * top).count())
}

/// Threshold used for every numerical-rank check in the crate.
pub const RANK_TOLERANCE: f64 = 1e-9;
