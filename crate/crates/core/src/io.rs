//! Plain-text and binary formats for weights, streams and factor matrices.
//!
//! Binary layout: `GFDP`, `u32` version, `u64` rows, `u64` cols, then the entries in
//! row-major order as little-endian `f64`.

use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const MAGIC: &[u8; 4] = b"GFDP";
pub const VERSION: u32 = 1;

/// One real per line; blank lines and an optional leading header `f` are skipped.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || (out.is_empty() && idx == 0 && line.eq_ignore_ascii_case("f")) {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| Error::Format(format!("line {}: `{line}` is not a number", idx + 1)))?;
        if !v.is_finite() {
            return Err(Error::Format(format!("line {}: value is not finite", idx + 1)));
        }
        out.push(v);
    }
    Ok(out)
}

pub fn read_values(path: &std::path::Path) -> Result<Vec<f64>> {
    parse_values(&std::fs::read_to_string(path)?)
}

/// Header `n=<rows>`, then one comma-separated row per line. Non-square matrices also
/// carry `cols=<cols>` so they can be read back.
pub fn matrix_to_csv(m: &Matrix<f64>) -> String {
    let mut out = if m.rows() == m.cols() {
        format!("n={}\n", m.rows())
    } else {
        format!("n={},cols={}\n", m.rows(), m.cols())
    };
    for i in 0..m.rows() {
        let row = m.row(i);
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:e}");
        }
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<Matrix<f64>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty matrix file".into()))?;
    let mut rows = None;
    let mut cols = None;
    for part in header.trim().split(',') {
        match part.split_once('=') {
            Some(("n", v)) => rows = v.parse::<usize>().ok(),
            Some(("cols", v)) => cols = v.parse::<usize>().ok(),
            _ => return Err(Error::Format(format!("bad header `{header}`"))),
        }
    }
    let rows = rows.ok_or_else(|| Error::Format(format!("bad header `{header}`")))?;
    let cols = cols.unwrap_or(rows);
    let mut data = Vec::with_capacity(rows * cols);
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let before = data.len();
        for cell in line.split(',') {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("`{cell}` is not a number")))?;
            data.push(v);
        }
        if data.len() - before != cols {
            return Err(Error::Format(format!("row has {} entries, expected {cols}", data.len() - before)));
        }
    }
    if data.len() != rows * cols {
        return Err(Error::Format(format!("expected {rows} rows, got {}", data.len() / cols.max(1))));
    }
    Ok(Matrix::from_row_major(rows, cols, data))
}

pub fn write_binary<W: Write>(m: &Matrix<f64>, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    for v in m.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Matrix<f64>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("missing GFDP magic".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported container version {version}")));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let rows = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let cols = u64::from_le_bytes(b8) as usize;
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Format("matrix shape overflows".into()))?;
    let mut data = Vec::with_capacity(len.min(1 << 24));
    for _ in 0..len {
        r.read_exact(&mut b8)?;
        data.push(f64::from_le_bytes(b8));
    }
    Ok(Matrix::from_row_major(rows, cols, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_with_and_without_header() {
        assert_eq!(parse_values("f\n1\n2.5\n\n-3\n").unwrap(), vec![1.0, 2.5, -3.0]);
        assert_eq!(parse_values("0.5\n").unwrap(), vec![0.5]);
        assert!(parse_values("1\nx\n").is_err());
        assert!(parse_values("nan\n").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let m = Matrix::from_row_major(2, 3, vec![1.0, -0.25, 3e-17, 0.0, 5.5, 1.0 / 3.0]);
        let text = matrix_to_csv(&m);
        assert!(text.starts_with("n=2,cols=3\n"));
        assert_eq!(matrix_from_csv(&text).unwrap(), m);
        let sq = Matrix::<f64>::identity(2);
        assert!(matrix_to_csv(&sq).starts_with("n=2\n"));
        assert!(matrix_from_csv("n=2\n1,2\n3\n").is_err());
    }

    #[test]
    fn binary_round_trip() {
        let m = Matrix::from_row_major(2, 2, vec![1.0, f64::MIN_POSITIVE, -2.0, 7.25]);
        let mut buf = Vec::new();
        write_binary(&m, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"GFDP");
        assert_eq!(buf.len(), 4 + 4 + 8 + 8 + 4 * 8);
        assert_eq!(read_binary(&buf[..]).unwrap(), m);
        buf[0] = b'X';
        assert!(read_binary(&buf[..]).is_err());
    }
}
