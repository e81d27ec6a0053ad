use rand::seq::index::sample;

use super::structured::{RankOneBlock, SparseEntry, Structured};
use crate::rng;
use crate::{Error, Result, Scalar};

/// Common weight patterns with cheap entrywise inverses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightFamily {
    /// At most `per_row` positive entries per row at random columns, values
    /// uniform in `[0.5, 1.5)`. The whole matrix is the sparse part.
    LowRankPlusSparse {
        n: usize,
        d: usize,
        per_row: usize,
        seed: u64,
    },
    /// `n × n` all ones except zeros on the diagonal.
    LowRankPlusDiagonal { n: usize },
    /// `n × n` all ones except zero diagonal blocks of the given sizes,
    /// placed contiguously from the top-left corner.
    LowRankPlusBlockDiagonal { n: usize, block_sizes: Vec<usize> },
    /// Row `i` is `prefix_lengths[i]` ones followed by zeros; lengths must be
    /// non-increasing.
    MonotoneMissing {
        d: usize,
        prefix_lengths: Vec<usize>,
    },
    /// `n × n` all ones except zeros where `|i − j| ≤ half_width`.
    Banded { n: usize, half_width: usize },
}

fn ones_minus<T: Scalar>(
    n: usize,
    holes: impl Iterator<Item = (usize, usize)>,
) -> Result<Structured<T>> {
    let block = RankOneBlock::ones((0..n).collect(), (0..n).collect())?;
    let sparse = holes
        .map(|(row, col)| SparseEntry {
            row,
            col,
            value: -T::one(),
        })
        .collect();
    Structured::new(n, n, sparse, vec![block])
}

/// Builds the structured representation of a named pattern.
pub fn make_family<T: Scalar>(kind: &WeightFamily) -> Result<Structured<T>> {
    match kind {
        &WeightFamily::LowRankPlusSparse {
            n,
            d,
            per_row,
            seed,
        } => {
            if per_row > d {
                return Err(Error::param(format!("per_row {per_row} exceeds d = {d}")));
            }
            let mut g = rng::seeded(seed);
            let mut sparse = Vec::with_capacity(n * per_row);
            for row in 0..n {
                for col in sample(&mut g, d, per_row).into_iter() {
                    sparse.push(SparseEntry {
                        row,
                        col,
                        value: rng::uniform(&mut g, 0.5, 1.5),
                    });
                }
            }
            Structured::new(n, d, sparse, vec![])
        }
        &WeightFamily::LowRankPlusDiagonal { n } => {
            if n == 0 {
                return Err(Error::param("n must be positive"));
            }
            ones_minus(n, (0..n).map(|i| (i, i)))
        }
        WeightFamily::LowRankPlusBlockDiagonal { n, block_sizes } => {
            let n = *n;
            let total: usize = block_sizes.iter().sum();
            if total > n || block_sizes.contains(&0) {
                return Err(Error::param(format!(
                    "block sizes {block_sizes:?} must be positive and sum to at most {n}"
                )));
            }
            // complement of each zero block along its rows, plus the rows
            // below all blocks as one full-width block
            let mut blocks = Vec::with_capacity(block_sizes.len() + 1);
            let mut offset = 0;
            for &s in block_sizes {
                let rows: Vec<usize> = (offset..offset + s).collect();
                let cols: Vec<usize> = (0..n)
                    .filter(|j| !(offset..offset + s).contains(j))
                    .collect();
                if !cols.is_empty() {
                    blocks.push(RankOneBlock::ones(rows, cols)?);
                }
                offset += s;
            }
            if offset < n {
                blocks.push(RankOneBlock::ones((offset..n).collect(), (0..n).collect())?);
            }
            Structured::new(n, n, vec![], blocks)
        }
        WeightFamily::MonotoneMissing { d, prefix_lengths } => {
            let d = *d;
            if prefix_lengths.windows(2).any(|w| w[0] < w[1]) {
                return Err(Error::param("prefix lengths must be non-increasing"));
            }
            if prefix_lengths.iter().any(|&l| l > d) {
                return Err(Error::param(format!("prefix length exceeds d = {d}")));
            }
            let n = prefix_lengths.len();
            let mut blocks = Vec::new();
            let mut start = 0;
            while start < n {
                let len = prefix_lengths[start];
                let mut end = start;
                while end < n && prefix_lengths[end] == len {
                    end += 1;
                }
                if len > 0 {
                    blocks.push(RankOneBlock::ones(
                        (start..end).collect(),
                        (0..len).collect(),
                    )?);
                }
                start = end;
            }
            Structured::new(n, d, vec![], blocks)
        }
        &WeightFamily::Banded { n, half_width } => {
            if half_width >= n {
                return Err(Error::param(format!(
                    "band half-width {half_width} must be below n = {n}"
                )));
            }
            ones_minus(
                n,
                (0..n).flat_map(move |i| {
                    let lo = i.saturating_sub(half_width);
                    let hi = (i + half_width).min(n - 1);
                    (lo..=hi).map(move |j| (i, j))
                }),
            )
        }
    }
}
