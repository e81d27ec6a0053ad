use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use super::{check_rank, dense_weight, Approximation};
use crate::linalg::{orthonormalize, pivoted_qr_columns, svd, Matrix};
use crate::rng;
use crate::weights::{support_inverse, WeightMatrix};
use crate::{Error, Result, Scalar};

/// How the column subset is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CssSelection {
    /// Businger–Golub column-pivoted QR on `W∘A`.
    PivotedQr,
    /// Two rounds of squared-norm sampling: half the columns from `W∘A`,
    /// the rest from its residual after projecting onto the first half.
    AdaptiveSampling { seed: u64 },
}

/// Column subset solution `W^{∘−1}∘((W∘A)|^S · X)`.
#[derive(Clone, Debug)]
pub struct CssSolution<'w, T, W: ?Sized> {
    /// Sorted, distinct column indices `S`.
    pub columns: Vec<usize>,
    /// `|S| × d` coefficients.
    pub coeffs: Matrix<T>,
    pub weight: &'w W,
    selected: Matrix<T>,
}

impl<T: Scalar, W: WeightMatrix<T> + ?Sized> CssSolution<'_, T, W> {
    /// `(W∘A)|^S`, an `n × |S|` matrix.
    pub fn selected(&self) -> &Matrix<T> {
        &self.selected
    }

    /// `(W∘A)|^S · X`.
    pub fn reweighted(&self) -> Matrix<T> {
        self.selected
            .matmul(&self.coeffs)
            .expect("conformable by construction")
    }

    /// `n·|S| + |S|·d` plus the storage of the weight.
    pub fn param_count(&self) -> usize {
        let c = self.columns.len();
        self.selected.rows() * c + c * self.coeffs.cols() + self.weight.storage()
    }
}

impl<T: Scalar, W: WeightMatrix<T> + ?Sized> Approximation<T> for CssSolution<'_, T, W> {
    fn shape(&self) -> (usize, usize) {
        (self.selected.rows(), self.coeffs.cols())
    }

    fn entry(&self, i: usize, j: usize) -> T {
        let mut acc = T::zero();
        for (t, &s) in self.selected.row(i).iter().enumerate() {
            acc += s * self.coeffs[(t, j)];
        }
        acc * support_inverse(self.weight.entry(i, j))
    }

    fn to_dense(&self) -> Matrix<T> {
        self.reweighted()
            .zip_map(&self.weight.to_dense(), |t, w| t * support_inverse(w))
            .expect("weight and factors share a shape")
    }

    fn weighted_residual(&self, a: &Matrix<T>, w: &Matrix<T>) -> Result<Matrix<T>> {
        let mut out = w.hadamard(a)?.sub(&self.reweighted())?;
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
                "column subset solution was computed for a different weight matrix",
            ));
        }
        Ok(())
    }
}

/// `min(d, ⌈2rk/ε⌉)`.
pub fn css_column_count(r: usize, k: usize, eps: f64, d: usize) -> Result<usize> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::param(format!("eps must be positive, got {eps}")));
    }
    let c = (2.0 * (r * k) as f64 / eps).ceil();
    Ok(if c >= d as f64 { d } else { c as usize })
}

/// Weighted column subset selection.
///
/// Selects `c = min(d, ⌈2rk/ε⌉)` columns `S` of `M = W∘A`, then fits `X` so
/// that `M|^S · X` is the best rank-`rk` approximation of `M` inside the
/// column span of `M|^S`. The reconstruction divides by `W` on its support.
pub fn css_wlra<'w, T, W>(
    a: &Matrix<T>,
    w: &'w W,
    r: usize,
    k: usize,
    eps: f64,
    selection: CssSelection,
) -> Result<CssSolution<'w, T, W>>
where
    T: Scalar,
    W: WeightMatrix<T> + ?Sized,
{
    let (n, d) = a.shape();
    let rk = r
        .checked_mul(k)
        .ok_or_else(|| Error::param("r·k overflows"))?;
    check_rank(rk, n, d, "css_wlra (r·k); use a smaller r·k or larger eps")?;
    let c = css_column_count(r, k, eps, d)?;
    dense_weight(a, w)?;
    let m = w.apply(a)?;
    let mut columns = match selection {
        CssSelection::PivotedQr => pivoted_qr_columns(&m, c),
        CssSelection::AdaptiveSampling { seed } => adaptive_sampling(&m, c, seed)?,
    };
    columns.sort_unstable();
    let selected = m.select_columns(&columns);
    let coeffs = constrained_coefficients(&selected, &m, rk)?;
    Ok(CssSolution {
        columns,
        coeffs,
        weight: w,
        selected,
    })
}

/// `X = V_ρ Σ_ρ⁻¹ (U_ρᵀ M)_{rk}` for `C = U_ρ Σ_ρ V_ρᵀ`.
fn constrained_coefficients<T: Scalar>(
    c: &Matrix<T>,
    m: &Matrix<T>,
    rk: usize,
) -> Result<Matrix<T>> {
    let (n, p) = c.shape();
    if p == 0 || n == 0 {
        return Ok(Matrix::zeros(p, m.cols()));
    }
    let s = svd(c)?;
    let top = s.singular_values[0];
    let cutoff = top * T::epsilon() * T::of_usize(n.max(p));
    let rho = s
        .singular_values
        .iter()
        .filter(|&&x| x > cutoff && x > T::zero())
        .count();
    if rho == 0 {
        return Ok(Matrix::zeros(p, m.cols()));
    }
    let sigma_inv: Vec<T> = s.singular_values[..rho]
        .iter()
        .map(|&x| T::one() / x)
        .collect();
    let ur = s.left.first_columns(rho);
    let vr_t = s.right.first_rows(rho);
    let proj = ur.t_matmul(m)?;
    let q = rk.min(rho).min(proj.cols());
    let proj_k = svd(&proj)?.truncate(q).reconstruct();
    vr_t.t_matmul(&proj_k.scale_rows(&sigma_inv))
}

/// Draws `count` distinct indices with probability proportional to `weights`
/// at each step; once the remaining mass is zero, takes the lowest unused
/// indices.
fn draw_distinct(
    g: &mut rng::WlraRng,
    mut weights: Vec<f64>,
    count: usize,
    taken: &mut [bool],
) -> Vec<usize> {
    let mut out = Vec::with_capacity(count);
    for (wi, &t) in weights.iter_mut().zip(taken.iter()) {
        if t {
            *wi = 0.0;
        }
    }
    while out.len() < count {
        let idx = match WeightedIndex::new(&weights) {
            Ok(dist) => dist.sample(g),
            Err(_) => match taken.iter().position(|&t| !t) {
                Some(i) => i,
                None => break,
            },
        };
        weights[idx] = 0.0;
        taken[idx] = true;
        out.push(idx);
    }
    out
}

fn adaptive_sampling<T: Scalar>(m: &Matrix<T>, c: usize, seed: u64) -> Result<Vec<usize>> {
    let d = m.cols();
    let mut g = rng::seeded(seed);
    let mut taken = vec![false; d];
    let col_norms = |mat: &Matrix<T>| -> Vec<f64> {
        let mut norms = vec![0.0; d];
        for i in 0..mat.rows() {
            for (nj, &v) in norms.iter_mut().zip(mat.row(i)) {
                *nj += (v * v).as_f64();
            }
        }
        norms
    };
    let first = c.div_ceil(2);
    let mut chosen = draw_distinct(&mut g, col_norms(m), first, &mut taken);
    if chosen.len() < c {
        let q = orthonormalize(&m.select_columns(&chosen));
        let residual = m.sub(&q.matmul(&q.t_matmul(m)?)?)?;
        let rest = draw_distinct(&mut g, col_norms(&residual), c - chosen.len(), &mut taken);
        chosen.extend(rest);
    }
    Ok(chosen)
}
