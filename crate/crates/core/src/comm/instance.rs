use rand::seq::index::sample;
use rand::Rng;

use crate::linalg::Matrix;
use crate::rng;
use crate::solvers::{weighted_loss, Approximation};
use crate::weights::{RankOneBlock, Structured};
use crate::{Error, Result};

/// What the lower-bound matrix holds outside the support of the mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OffSupport {
    /// `r` horizontal copies of the padded secret, so `A` itself has rank `≤ k`.
    Copies,
    /// Uniform integers in `[−amplitude, amplitude]`. The weighted problem is
    /// unchanged while unweighted methods see a high-rank matrix.
    Random { amplitude: i64 },
}

/// Block-diagonal mask instance hiding a binary `sr × k` secret.
#[derive(Clone, Debug)]
pub struct BlockDiagInstance {
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub k: usize,
    /// `r` all-ones `n/r × n/r` blocks on the diagonal.
    pub w: Structured<f64>,
    pub a: Matrix<f64>,
    pub a_dense: Matrix<f64>,
}

impl BlockDiagInstance {
    fn block(&self) -> usize {
        self.n / self.r
    }

    /// The padded secret: row block `j` holds secret rows `js..js+s` on top,
    /// the first `k` columns carry the secret.
    pub fn a_pad(&self) -> Matrix<f64> {
        let b = self.block();
        let mut pad = Matrix::zeros(self.n, b);
        for j in 0..self.r {
            for i in 0..self.s {
                for c in 0..self.k {
                    pad[(j * b + i, c)] = self.a_dense[(j * self.s + i, c)];
                }
            }
        }
        pad
    }

    /// `r` horizontal copies of the padded secret; rank `≤ k` and zero loss.
    pub fn a_star(&self) -> Matrix<f64> {
        let pad = self.a_pad();
        let mut out = pad.clone();
        for _ in 1..self.r {
            out = out.hstack(&pad).expect("equal row counts");
        }
        out
    }
}

/// Builds the lower-bound instance for `n`, `r | n` and `s, k ≤ n/r`.
pub fn build_lb_instance(
    n: usize,
    r: usize,
    s: usize,
    k: usize,
    seed: u64,
    off: OffSupport,
) -> Result<BlockDiagInstance> {
    if r == 0 || n == 0 || !n.is_multiple_of(r) {
        return Err(Error::param(format!(
            "r = {r} must be positive and divide n = {n}"
        )));
    }
    let b = n / r;
    if s == 0 || k == 0 || s > b || k > b {
        return Err(Error::param(format!(
            "need 1 ≤ s, k ≤ n/r = {b}, got s = {s}, k = {k}"
        )));
    }
    let mut g = rng::seeded(seed);
    let a_dense = Matrix::from_fn(s * r, k, |_, _| if g.random_bool(0.5) { 1.0 } else { 0.0 });
    let blocks = (0..r)
        .map(|j| {
            RankOneBlock::ones(
                (j * b..(j + 1) * b).collect(),
                (j * b..(j + 1) * b).collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let w = Structured::new(n, n, vec![], blocks)?;
    let mut inst = BlockDiagInstance {
        n,
        r,
        s,
        k,
        w,
        a: Matrix::zeros(n, n),
        a_dense,
    };
    let mut a = inst.a_star();
    if let OffSupport::Random { amplitude } = off {
        for i in 0..n {
            for j in 0..n {
                if i / b != j / b {
                    a[(i, j)] = g.random_range(-amplitude..=amplitude) as f64;
                }
            }
        }
    }
    inst.a = a;
    Ok(inst)
}

/// Reads the planted positions of an approximation and rounds them to
/// `{0, 1}`.
///
/// Fails when the weighted loss is at least `1/4`: below that every entry
/// on the support is within `1/2` of the binary truth.
pub fn recover_secret(
    approx: &dyn Approximation<f64>,
    inst: &BlockDiagInstance,
) -> Result<Matrix<f64>> {
    let loss = weighted_loss(&inst.a, &inst.w, approx)?;
    if !(loss < 0.25) {
        return Err(Error::Recovery(format!(
            "weighted loss {loss:e} is not below 1/4; the secret cannot be read off"
        )));
    }
    let b = inst.block();
    Ok(Matrix::from_fn(inst.s * inst.r, inst.k, |row, c| {
        let (j, i) = (row / inst.s, row % inst.s);
        let v = approx.entry(j * b + i, j * b + c);
        if v >= 0.5 {
            1.0
        } else {
            0.0
        }
    }))
}

/// `n × d` binary matrix with exactly `s` ones per column at random rows,
/// used for bit-count scaling where `d ≤ s`.
pub fn sparse_column_matrix(n: usize, d: usize, s: usize, seed: u64) -> Result<Matrix<f64>> {
    if s > n {
        return Err(Error::param(format!("column sparsity {s} exceeds n = {n}")));
    }
    let mut g = rng::seeded(seed);
    let mut a = Matrix::zeros(n, d);
    for j in 0..d {
        for i in sample(&mut g, n, s).into_iter() {
            a[(i, j)] = 1.0;
        }
    }
    Ok(a)
}
