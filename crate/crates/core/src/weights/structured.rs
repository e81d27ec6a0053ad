use std::cmp::Ordering;

use super::{support_inverse, WeightMatrix};
use crate::linalg::{dot, LowRank, Matrix};
use crate::{Error, Result, Scalar};

/// Rank-1 matrix `a bᵀ` supported on the rectangle `rows × cols`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOneBlock<T> {
    rows: Vec<usize>,
    cols: Vec<usize>,
    row_values: Vec<T>,
    col_values: Vec<T>,
}

fn check_support(idx: &[usize], bound: usize, what: &str) -> Result<()> {
    if idx.is_empty() {
        return Err(Error::param(format!("block {what} support is empty")));
    }
    if idx.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param(format!(
            "block {what} support must be strictly increasing"
        )));
    }
    if let Some(&last) = idx.last() {
        if last >= bound {
            return Err(Error::param(format!(
                "block {what} index {last} out of range {bound}"
            )));
        }
    }
    Ok(())
}

impl<T: Scalar> RankOneBlock<T> {
    pub fn new(
        rows: Vec<usize>,
        cols: Vec<usize>,
        row_values: Vec<T>,
        col_values: Vec<T>,
    ) -> Result<Self> {
        if rows.len() != row_values.len() || cols.len() != col_values.len() {
            return Err(Error::param("block values must match support lengths"));
        }
        if row_values
            .iter()
            .chain(&col_values)
            .any(|&v| !(v > T::zero()) || !v.is_finite())
        {
            return Err(Error::param("block values must be strictly positive"));
        }
        check_support(&rows, usize::MAX, "row")?;
        check_support(&cols, usize::MAX, "column")?;
        Ok(Self {
            rows,
            cols,
            row_values,
            col_values,
        })
    }

    /// All-ones block on `rows × cols`.
    pub fn ones(rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        let (r, c) = (rows.len(), cols.len());
        Self::new(rows, cols, vec![T::one(); r], vec![T::one(); c])
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn row_values(&self) -> &[T] {
        &self.row_values
    }

    pub fn col_values(&self) -> &[T] {
        &self.col_values
    }

    /// Value at `(i, j)` if the block covers it.
    fn value_at(&self, i: usize, j: usize) -> Option<T> {
        let ri = self.rows.binary_search(&i).ok()?;
        let cj = self.cols.binary_search(&j).ok()?;
        Some(self.row_values[ri] * self.col_values[cj])
    }

    fn support_size(&self) -> usize {
        self.rows.len() + self.cols.len()
    }
}

/// One entry of the sparse part `E`.
///
/// Outside every block the value is the weight itself and must be positive.
/// Inside a block it is an additive correction to the block value; the
/// corrected weight must stay non-negative (it may be exactly zero, which is
/// how "all ones except a band" patterns are expressed).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SparseEntry<T> {
    pub row: usize,
    pub col: usize,
    pub value: T,
}

/// Weight `W = E + Σ Sᵢ` with rank-1 `Sᵢ` on pairwise disjoint rectangles.
#[derive(Clone, Debug)]
pub struct Structured<T> {
    n: usize,
    d: usize,
    sparse: Vec<SparseEntry<T>>,
    blocks: Vec<RankOneBlock<T>>,
    /// Blocks covering each row.
    row_blocks: Vec<Vec<usize>>,
    /// Per sparse entry: covering block value (zero when uncovered) and the
    /// resulting weight.
    sparse_base: Vec<T>,
    sparse_weight: Vec<T>,
}

fn sorted_intersect(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => return true,
        }
    }
    false
}

impl<T: Scalar> Structured<T> {
    pub fn new(
        n: usize,
        d: usize,
        mut sparse: Vec<SparseEntry<T>>,
        blocks: Vec<RankOneBlock<T>>,
    ) -> Result<Self> {
        let mut row_blocks = vec![Vec::new(); n];
        for (b, block) in blocks.iter().enumerate() {
            check_support(&block.rows, n, "row")?;
            check_support(&block.cols, d, "column")?;
            for &i in &block.rows {
                row_blocks[i].push(b);
            }
        }
        // two rectangles overlap iff they share a row and a column
        for a in 0..blocks.len() {
            for b in a + 1..blocks.len() {
                if sorted_intersect(&blocks[a].rows, &blocks[b].rows)
                    && sorted_intersect(&blocks[a].cols, &blocks[b].cols)
                {
                    return Err(Error::param(format!("blocks {a} and {b} overlap")));
                }
            }
        }

        sparse.sort_by_key(|e| (e.row, e.col));
        if let Some(w) = sparse
            .windows(2)
            .find(|w| (w[0].row, w[0].col) == (w[1].row, w[1].col))
        {
            return Err(Error::param(format!(
                "duplicate sparse entry at ({}, {})",
                w[0].row, w[0].col
            )));
        }
        let mut sparse_base = Vec::with_capacity(sparse.len());
        let mut sparse_weight = Vec::with_capacity(sparse.len());
        for e in &sparse {
            if e.row >= n || e.col >= d || !e.value.is_finite() {
                return Err(Error::param(format!(
                    "sparse entry ({}, {}) invalid for {n}x{d}",
                    e.row, e.col
                )));
            }
            let base = row_blocks[e.row]
                .iter()
                .find_map(|&b| blocks[b].value_at(e.row, e.col));
            let weight = match base {
                None => {
                    if !(e.value > T::zero()) {
                        return Err(Error::param(format!(
                            "sparse entry ({}, {}) outside blocks must be positive",
                            e.row, e.col
                        )));
                    }
                    e.value
                }
                Some(b) => {
                    let w = b + e.value;
                    let slack = b * T::epsilon() * T::of(8.0);
                    if w < -slack {
                        return Err(Error::param(format!(
                            "correction at ({}, {}) makes the weight negative",
                            e.row, e.col
                        )));
                    }
                    if w.abs() <= slack {
                        T::zero()
                    } else {
                        w
                    }
                }
            };
            sparse_base.push(base.unwrap_or_else(T::zero));
            sparse_weight.push(weight);
        }
        Ok(Self {
            n,
            d,
            sparse,
            blocks,
            row_blocks,
            sparse_base,
            sparse_weight,
        })
    }

    pub fn sparse_entries(&self) -> &[SparseEntry<T>] {
        &self.sparse
    }

    pub fn blocks(&self) -> &[RankOneBlock<T>] {
        &self.blocks
    }

    /// `nnz(E) + #blocks`, an upper bound on `rank(W)`.
    pub fn rank_bound(&self) -> usize {
        self.sparse.len() + self.blocks.len()
    }

    /// `nnz(E) + Σ (|Sᵢ| + |Tᵢ|)`.
    pub fn structure_size(&self) -> usize {
        self.sparse.len()
            + self
                .blocks
                .iter()
                .map(RankOneBlock::support_size)
                .sum::<usize>()
    }

    fn block_value(&self, i: usize, j: usize) -> Option<T> {
        self.row_blocks[i]
            .iter()
            .find_map(|&b| self.blocks[b].value_at(i, j))
    }

    fn sparse_index(&self, i: usize, j: usize) -> Option<usize> {
        self.sparse
            .binary_search_by(|e| (e.row, e.col).cmp(&(i, j)))
            .ok()
    }
}

/// `nnz(E) + #blocks`.
pub fn structured_rank_bound<T: Scalar>(w: &Structured<T>) -> usize {
    w.rank_bound()
}

impl<T: Scalar> WeightMatrix<T> for Structured<T> {
    fn shape(&self) -> (usize, usize) {
        (self.n, self.d)
    }

    fn entry(&self, i: usize, j: usize) -> T {
        if let Some(s) = self.sparse_index(i, j) {
            return self.sparse_weight[s];
        }
        self.block_value(i, j).unwrap_or_else(T::zero)
    }

    fn to_dense(&self) -> Matrix<T> {
        let mut w = Matrix::zeros(self.n, self.d);
        for block in &self.blocks {
            for (&i, &a) in block.rows.iter().zip(&block.row_values) {
                for (&j, &c) in block.cols.iter().zip(&block.col_values) {
                    w[(i, j)] = a * c;
                }
            }
        }
        for (e, &v) in self.sparse.iter().zip(&self.sparse_weight) {
            w[(e.row, e.col)] = v;
        }
        w
    }

    fn storage(&self) -> usize {
        self.structure_size()
    }

    fn apply(&self, a: &Matrix<T>) -> Result<Matrix<T>> {
        if a.shape() != (self.n, self.d) {
            return Err(Error::shape("weight_apply", (self.n, self.d), a.shape()));
        }
        let mut out = Matrix::zeros(self.n, self.d);
        for block in &self.blocks {
            for (&i, &r) in block.rows.iter().zip(&block.row_values) {
                for (&j, &c) in block.cols.iter().zip(&block.col_values) {
                    out[(i, j)] = r * c * a[(i, j)];
                }
            }
        }
        for (e, &v) in self.sparse.iter().zip(&self.sparse_weight) {
            out[(e.row, e.col)] = v * a[(e.row, e.col)];
        }
        Ok(out)
    }
}

/// Arithmetic performed by one inverse application.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct InverseApplyStats {
    /// Multiply-add count, including scalings by stored reciprocals.
    pub multiply_adds: u64,
}

/// `(W^{∘−1} ∘ (UV)) x` without forming any `n × d` matrix.
///
/// Each block contributes `diag(1/a) U_S (V_T (x_T / c))`, which costs
/// `(|S| + |T|)·k`; each sparse entry contributes a single `k`-term dot
/// product correcting whatever the covering block (if any) already added.
/// Entries where `W = 0` contribute nothing.
pub fn inverse_weight_apply_vector<T: Scalar>(
    w: &Structured<T>,
    f: &LowRank<T>,
    x: &[T],
) -> Result<(Vec<T>, InverseApplyStats)> {
    if f.shape() != (w.n, w.d) {
        return Err(Error::shape(
            "inverse_weight_apply_vector",
            (w.n, w.d),
            f.shape(),
        ));
    }
    if x.len() != w.d {
        return Err(Error::shape(
            "inverse_weight_apply_vector",
            (w.d, 1),
            (x.len(), 1),
        ));
    }
    let (u, v) = (f.left(), f.right());
    let k = f.rank();
    let mut ops: u64 = 0;
    let mut y = vec![T::zero(); w.n];
    let mut z = vec![T::zero(); k];
    for block in &w.blocks {
        z.iter_mut().for_each(|t| *t = T::zero());
        for (&j, &c) in block.cols.iter().zip(&block.col_values) {
            let xj = x[j] / c;
            for (t, zt) in z.iter_mut().enumerate() {
                *zt += v[(t, j)] * xj;
            }
        }
        ops += (block.cols.len() * (k + 1)) as u64;
        for (&i, &a) in block.rows.iter().zip(&block.row_values) {
            y[i] += dot(u.row(i), &z) / a;
        }
        ops += (block.rows.len() * (k + 1)) as u64;
    }
    for ((e, &base), &weight) in w.sparse.iter().zip(&w.sparse_base).zip(&w.sparse_weight) {
        let correction = support_inverse(weight) - support_inverse(base);
        let mut uv = T::zero();
        for t in 0..k {
            uv += u[(e.row, t)] * v[(t, e.col)];
        }
        y[e.row] += correction * uv * x[e.col];
        ops += (k + 2) as u64;
    }
    Ok((y, InverseApplyStats { multiply_adds: ops }))
}
