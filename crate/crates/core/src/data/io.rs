use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::linalg::Matrix;
use crate::{Error, Result};

pub const BINARY_MAGIC: &[u8; 4] = b"WLRM";
pub const BINARY_VERSION: u8 = 1;
const BINARY_HEADER: usize = 4 + 1 + 8 + 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Binary,
}

impl MatrixFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MatrixFormat::Csv => "csv",
            MatrixFormat::Binary => "bin",
        }
    }
}

impl FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(MatrixFormat::Csv),
            "bin" | "binary" => Ok(MatrixFormat::Binary),
            other => Err(Error::param(format!(
                "unknown matrix format '{other}' (expected csv or bin)"
            ))),
        }
    }
}

pub fn read_matrix(path: &Path, format: MatrixFormat) -> Result<Matrix<f64>> {
    match format {
        MatrixFormat::Csv => read_csv(path),
        MatrixFormat::Binary => read_binary(path),
    }
}

pub fn write_matrix(path: &Path, m: &Matrix<f64>, format: MatrixFormat) -> Result<()> {
    match format {
        MatrixFormat::Csv => write_csv(path, m),
        MatrixFormat::Binary => write_binary(path, m),
    }
}

/// Comma-separated rows written with 17 significant digits.
pub fn write_csv(path: &Path, m: &Matrix<f64>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(csv_string(m).as_bytes())?;
    out.flush()?;
    Ok(())
}

pub fn csv_string(m: &Matrix<f64>) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|x| format!("{x:.16e}")).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Parses CSV text; blank lines and lines starting with `#` are skipped.
pub fn parse_csv(text: &str, source: &str) -> Result<Matrix<f64>> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let location = || format!("{source}:{}", lineno + 1);
        let mut count = 0;
        for (field_no, field) in line.split(',').enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                location: location(),
                message: format!("field {} '{}' is not a number", field_no + 1, field.trim()),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    location: location(),
                    message: format!("field {} is not finite", field_no + 1),
                });
            }
            data.push(v);
            count += 1;
        }
        match cols {
            None => cols = Some(count),
            Some(c) if c != count => {
                return Err(Error::Parse {
                    location: location(),
                    message: format!("expected {c} fields, found {count}"),
                })
            }
            _ => {}
        }
        rows += 1;
    }
    Matrix::from_vec(rows, cols.unwrap_or(0), data)
}

pub fn read_csv(path: &Path) -> Result<Matrix<f64>> {
    let mut text = String::new();
    for line in BufReader::new(fs::File::open(path)?).lines() {
        text.push_str(&line?);
        text.push('\n');
    }
    parse_csv(&text, &path.display().to_string())
}

/// `WLRM`, version byte, `u64` LE rows and columns, then `f64` LE row-major.
pub fn binary_bytes(m: &Matrix<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(BINARY_HEADER + 8 * m.as_slice().len());
    out.extend_from_slice(BINARY_MAGIC);
    out.push(BINARY_VERSION);
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for x in m.as_slice() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn write_binary(path: &Path, m: &Matrix<f64>) -> Result<()> {
    fs::write(path, binary_bytes(m))?;
    Ok(())
}

pub fn parse_binary(bytes: &[u8], source: &str) -> Result<Matrix<f64>> {
    let bad = |offset: usize, message: String| Error::Parse {
        location: format!("{source}: byte {offset}"),
        message,
    };
    if bytes.len() < BINARY_HEADER {
        return Err(bad(
            bytes.len(),
            "file shorter than the 21-byte header".into(),
        ));
    }
    if &bytes[..4] != BINARY_MAGIC {
        return Err(bad(0, "bad magic, expected WLRM".into()));
    }
    if bytes[4] != BINARY_VERSION {
        return Err(bad(4, format!("unsupported version {}", bytes[4])));
    }
    let rows = u64::from_le_bytes(bytes[5..13].try_into().expect("8 bytes"));
    let cols = u64::from_le_bytes(bytes[13..21].try_into().expect("8 bytes"));
    let count = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(8))
        .and_then(|b| usize::try_from(b).ok())
        .ok_or_else(|| Error::param(format!("declared dimensions {rows}x{cols} overflow")))?;
    let body = &bytes[BINARY_HEADER..];
    if body.len() != count {
        return Err(bad(
            BINARY_HEADER,
            format!(
                "{rows}x{cols} needs {count} payload bytes, found {}",
                body.len()
            ),
        ));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Matrix::from_vec(rows as usize, cols as usize, data)
}

pub fn read_binary(path: &Path) -> Result<Matrix<f64>> {
    parse_binary(&fs::read(path)?, &path.display().to_string())
}
