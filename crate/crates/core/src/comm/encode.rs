use bitvec::prelude::*;

use crate::linalg::Matrix;
use crate::solvers::CssSolution;
use crate::weights::{support_inverse, WeightMatrix};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"WLRC";
pub const VERSION: u8 = 1;
/// Magic, version, five `u32` fields and the `u64` payload length.
pub const HEADER_BITS: u64 = (4 + 1 + 5 * 4 + 8) * 8;

/// `⌈log₂ x⌉` for `x ≥ 1`; zero for `x ≤ 1`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Bits needed for a value in `0..count`, at least one.
fn index_bits(count: usize) -> u32 {
    ceil_log2(count as u64).max(1)
}

/// Sign bit plus at least one magnitude bit.
fn signed_bits(max_magnitude: u64) -> u32 {
    1 + ceil_log2(max_magnitude.saturating_add(1)).max(1)
}

/// `(nd)²`, the denominator of the coefficient grid.
pub fn coeff_scale(n: usize, d: usize) -> f64 {
    let nd = (n as f64) * (d as f64);
    nd * nd
}

/// A column subset solution serialized for the two-party game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedSolution {
    pub n: usize,
    pub d: usize,
    pub column_indices: Vec<usize>,
    /// Nonzero `(row, value)` pairs of each sent column of `A`.
    pub column_payload: Vec<Vec<(usize, i64)>>,
    /// `round(x·(nd)²)` for the `|S| × d` coefficients, row-major.
    pub coeff_payload: Vec<i64>,
    pub bits_per_entry: u32,
    pub coeff_bits: u32,
    /// Header plus payload bits.
    pub total_bits: u64,
}

struct Widths {
    index: u32,
    count: u32,
    position: u32,
}

impl Widths {
    fn new(n: usize, d: usize) -> Self {
        Self {
            index: index_bits(d),
            count: ceil_log2(n as u64 + 1).max(1),
            position: index_bits(n),
        }
    }
}

fn push(bits: &mut BitVec<u8, Msb0>, value: u64, width: u32) {
    let start = bits.len();
    bits.resize(start + width as usize, false);
    bits[start..].store_be(value);
}

fn push_signed(bits: &mut BitVec<u8, Msb0>, value: i64, width: u32) {
    push(bits, u64::from(value < 0), 1);
    push(bits, value.unsigned_abs(), width - 1);
}

struct Reader<'a> {
    bits: &'a BitSlice<u8, Msb0>,
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, width: u32) -> Result<u64> {
        let end = self.pos + width as usize;
        if end > self.bits.len() {
            return Err(Error::Parse {
                location: format!("payload bit {}", self.pos),
                message: "payload ends early".into(),
            });
        }
        let v = self.bits[self.pos..end].load_be::<u64>();
        self.pos = end;
        Ok(v)
    }

    fn take_signed(&mut self, width: u32) -> Result<i64> {
        let negative = self.take(1)? == 1;
        let mag = self.take(width - 1)? as i64;
        Ok(if negative { -mag } else { mag })
    }
}

impl EncodedSolution {
    fn payload(&self) -> BitVec<u8, Msb0> {
        let w = Widths::new(self.n, self.d);
        let mut bits = BitVec::new();
        for (&j, col) in self.column_indices.iter().zip(&self.column_payload) {
            push(&mut bits, j as u64, w.index);
            push(&mut bits, col.len() as u64, w.count);
            for &(i, v) in col {
                push(&mut bits, i as u64, w.position);
                push_signed(&mut bits, v, self.bits_per_entry);
            }
        }
        for &q in &self.coeff_payload {
            push_signed(&mut bits, q, self.coeff_bits);
        }
        bits
    }

    /// Length-prefixed byte stream: magic, version, `n`, `d`, `|S|`,
    /// `bits_per_entry`, `coeff_bits` as `u32` LE, payload bit length as
    /// `u64` LE, then the payload packed most-significant bit first.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let as_u32 = |x: usize, what: &str| {
            u32::try_from(x).map_err(|_| {
                Error::param(format!("{what} = {x} does not fit the u32 header field"))
            })
        };
        let payload = self.payload();
        let mut out = Vec::with_capacity(33 + payload.as_raw_slice().len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        for (v, what) in [
            (self.n, "n"),
            (self.d, "d"),
            (self.column_indices.len(), "|S|"),
        ] {
            out.extend_from_slice(&as_u32(v, what)?.to_le_bytes());
        }
        out.extend_from_slice(&self.bits_per_entry.to_le_bytes());
        out.extend_from_slice(&self.coeff_bits.to_le_bytes());
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(payload.as_raw_slice());
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |offset: usize, message: &str| Error::Parse {
            location: format!("byte {offset}"),
            message: message.into(),
        };
        if bytes.len() < 33 {
            return Err(bad(bytes.len(), "stream shorter than the header"));
        }
        if &bytes[..4] != MAGIC {
            return Err(bad(0, "bad magic"));
        }
        if bytes[4] != VERSION {
            return Err(bad(4, "unsupported version"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
        let (n, d, count) = (u32_at(5) as usize, u32_at(9) as usize, u32_at(13) as usize);
        let (bits_per_entry, coeff_bits) = (u32_at(17), u32_at(21));
        if !(2..=64).contains(&bits_per_entry) || !(2..=64).contains(&coeff_bits) {
            return Err(bad(17, "entry widths must lie in 2..=64"));
        }
        let payload_bits = u64::from_le_bytes(bytes[25..33].try_into().expect("8 bytes"));
        let body = &bytes[33..];
        if (body.len() as u64) != payload_bits.div_ceil(8) {
            return Err(bad(33, "payload length disagrees with the header"));
        }
        let bits = &body.view_bits::<Msb0>()[..payload_bits as usize];
        let w = Widths::new(n, d);
        let mut r = Reader { bits, pos: 0 };
        let mut column_indices = Vec::with_capacity(count);
        let mut column_payload = Vec::with_capacity(count);
        for _ in 0..count {
            column_indices.push(r.take(w.index)? as usize);
            let nnz = r.take(w.count)? as usize;
            let mut col = Vec::with_capacity(nnz);
            for _ in 0..nnz {
                let i = r.take(w.position)? as usize;
                col.push((i, r.take_signed(bits_per_entry)?));
            }
            column_payload.push(col);
        }
        let coeff_payload = (0..count * d)
            .map(|_| r.take_signed(coeff_bits))
            .collect::<Result<Vec<_>>>()?;
        if r.pos != bits.len() {
            return Err(bad(33 + r.pos / 8, "trailing payload bits"));
        }
        Ok(Self {
            n,
            d,
            column_indices,
            column_payload,
            coeff_payload,
            bits_per_entry,
            coeff_bits,
            total_bits: HEADER_BITS + payload_bits,
        })
    }

    /// `A|^S` as an `n × |S|` dense matrix.
    pub fn columns_dense(&self) -> Matrix<f64> {
        let mut c = Matrix::zeros(self.n, self.column_indices.len());
        for (t, col) in self.column_payload.iter().enumerate() {
            for &(i, v) in col {
                c[(i, t)] = v as f64;
            }
        }
        c
    }

    /// Dequantized `X`.
    pub fn coeffs_dense(&self) -> Matrix<f64> {
        let scale = coeff_scale(self.n, self.d);
        Matrix::from_fn(self.column_indices.len(), self.d, |t, j| {
            self.coeff_payload[t * self.d + j] as f64 / scale
        })
    }

    /// Receiver side: `W^{∘−1}∘((W∘A)|^S · X)` from the message and `W`.
    pub fn reconstruct<W: WeightMatrix<f64> + ?Sized>(&self, w: &W) -> Result<Matrix<f64>> {
        if w.shape() != (self.n, self.d) {
            return Err(Error::shape(
                "reconstruct weight",
                (self.n, self.d),
                w.shape(),
            ));
        }
        let wd = w.to_dense();
        let mut sel = self.columns_dense();
        for i in 0..self.n {
            for (t, &j) in self.column_indices.iter().enumerate() {
                sel[(i, t)] *= wd[(i, j)];
            }
        }
        let m = sel.matmul(&self.coeffs_dense())?;
        m.zip_map(&wd, |x, wij| x * support_inverse(wij))
    }
}

/// Encodes the columns `A|^S` and the coefficients `X` of a column subset
/// solution. `A` must be integral with `|Aᵢⱼ| ≤ (nd)³`.
pub fn encode_css<W: WeightMatrix<f64> + ?Sized>(
    a: &Matrix<f64>,
    sol: &CssSolution<'_, f64, W>,
    n: usize,
    d: usize,
) -> Result<EncodedSolution> {
    if a.shape() != (n, d) {
        return Err(Error::shape("encode_css", (n, d), a.shape()));
    }
    let bound = ((n as f64) * (d as f64)).powi(3);
    let mut column_payload = Vec::with_capacity(sol.columns.len());
    let mut max_entry = 0u64;
    for &j in &sol.columns {
        if j >= d {
            return Err(Error::param(format!("column index {j} out of range {d}")));
        }
        let mut col = Vec::new();
        for i in 0..n {
            let v = a[(i, j)];
            if v.fract() != 0.0 || v.abs() > bound {
                return Err(Error::param(format!(
                    "entry ({i}, {j}) = {v} is not an integer of magnitude at most (nd)³ = {bound}"
                )));
            }
            if v != 0.0 {
                let q = v as i64;
                max_entry = max_entry.max(q.unsigned_abs());
                col.push((i, q));
            }
        }
        column_payload.push(col);
    }
    let scale = coeff_scale(n, d);
    let mut max_coeff = 0u64;
    let mut coeff_payload = Vec::with_capacity(sol.coeffs.rows() * d);
    for &x in sol.coeffs.as_slice() {
        let q = (x * scale).round();
        if !(q.abs() < 2f64.powi(62)) {
            return Err(Error::param(format!(
                "coefficient {x} overflows the (nd)² grid"
            )));
        }
        let q = q as i64;
        max_coeff = max_coeff.max(q.unsigned_abs());
        coeff_payload.push(q);
    }
    let mut enc = EncodedSolution {
        n,
        d,
        column_indices: sol.columns.clone(),
        column_payload,
        coeff_payload,
        bits_per_entry: signed_bits(max_entry),
        coeff_bits: signed_bits(max_coeff),
        total_bits: 0,
    };
    enc.total_bits = HEADER_BITS + enc.payload().len() as u64;
    Ok(enc)
}
