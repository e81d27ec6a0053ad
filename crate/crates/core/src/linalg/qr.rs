use super::{dot, Matrix};
use crate::Scalar;

/// Householder reflectors of an `n × p` matrix, stored column-major.
struct Householder<T> {
    n: usize,
    /// Reflector vectors, `v_j` has zeros above index `j`.
    vs: Vec<Vec<T>>,
    betas: Vec<T>,
}

impl<T: Scalar> Householder<T> {
    fn reflect(&self, j: usize, x: &mut [T]) {
        let v = &self.vs[j];
        let beta = self.betas[j];
        if beta == T::zero() {
            return;
        }
        let s = dot(&v[j..], &x[j..]) * beta;
        for (xi, &vi) in x[j..].iter_mut().zip(&v[j..]) {
            *xi -= s * vi;
        }
    }

    /// First `p` columns of `Q = H_0 H_1 ⋯`.
    fn thin_q(&self, p: usize) -> Matrix<T> {
        let mut q = Matrix::zeros(self.n, p);
        for c in 0..p {
            let mut e = vec![T::zero(); self.n];
            e[c] = T::one();
            for j in (0..self.vs.len()).rev() {
                self.reflect(j, &mut e);
            }
            for (i, &x) in e.iter().enumerate() {
                q[(i, c)] = x;
            }
        }
        q
    }
}

/// Builds the reflector that maps `x[j..]` onto a multiple of `e_j`.
fn make_reflector<T: Scalar>(x: &[T], j: usize) -> (Vec<T>, T) {
    let mut v = vec![T::zero(); x.len()];
    let norm = dot(&x[j..], &x[j..]).sqrt();
    if norm == T::zero() {
        return (v, T::zero());
    }
    let alpha = if x[j] > T::zero() { -norm } else { norm };
    v[j..].copy_from_slice(&x[j..]);
    v[j] -= alpha;
    let vv = dot(&v[j..], &v[j..]);
    if vv == T::zero() {
        return (v, T::zero());
    }
    (v, T::of(2.0) / vv)
}

/// Orthonormal basis (thin `Q`, `n × min(n, p)`) for the column space of `y`
/// by Householder QR. Columns past the numerical rank are still orthonormal.
pub fn orthonormalize<T: Scalar>(y: &Matrix<T>) -> Matrix<T> {
    let (n, p) = y.shape();
    let steps = n.min(p);
    let mut cols: Vec<Vec<T>> = (0..p).map(|j| y.column(j)).collect();
    let mut h = Householder {
        n,
        vs: Vec::with_capacity(steps),
        betas: Vec::with_capacity(steps),
    };
    for j in 0..steps {
        let (v, beta) = make_reflector(&cols[j], j);
        h.vs.push(v);
        h.betas.push(beta);
        for c in cols.iter_mut().skip(j) {
            h.reflect(j, c);
        }
    }
    h.thin_q(steps)
}

/// Greedy column pivoting (Businger–Golub): returns the first `c` pivot
/// columns in selection order.
///
/// Residual column norms are recomputed after each step rather than
/// downdated, which is exact at the sizes used here.
pub fn pivoted_qr_columns<T: Scalar>(m: &Matrix<T>, c: usize) -> Vec<usize> {
    let (n, d) = m.shape();
    let c = c.min(d);
    let mut cols: Vec<Vec<T>> = (0..d).map(|j| m.column(j)).collect();
    let mut perm: Vec<usize> = (0..d).collect();
    let steps = c.min(n);
    for j in 0..steps {
        let mut best = j;
        let mut best_norm = T::neg_infinity();
        for (pos, col) in cols.iter().enumerate().skip(j) {
            let r = dot(&col[j..], &col[j..]);
            if r > best_norm {
                best_norm = r;
                best = pos;
            }
        }
        cols.swap(j, best);
        perm.swap(j, best);
        let (v, beta) = make_reflector(&cols[j], j);
        if beta == T::zero() {
            continue;
        }
        for col in cols.iter_mut().skip(j) {
            let s = dot(&v[j..], &col[j..]) * beta;
            for (xi, &vi) in col[j..].iter_mut().zip(&v[j..]) {
                *xi -= s * vi;
            }
        }
    }
    // when c > n every remaining column is taken in original order
    perm.truncate(c);
    perm
}
