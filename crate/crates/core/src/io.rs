//! Plain-text and binary image formats.
//!
//! CSV: the first line holds `rows,cols`; each following line holds one image
//! row of `cols` comma-separated values (row-major, top row first).
//!
//! Binary: the 8-byte magic `SGIMG001`, then `rows` and `cols` as
//! little-endian `u64`, then `rows * cols` little-endian `f64` values in
//! row-major order.

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::grid::Image;

const MAGIC: &[u8; 8] = b"SGIMG001";

pub fn write_image_csv<W: Write>(img: &Image, mut w: W) -> Result<()> {
    writeln!(w, "{},{}", img.rows(), img.cols())?;
    for r in 0..img.rows() {
        let line: Vec<String> = (0..img.cols()).map(|c| format!("{:e}", img.get(r, c))).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn read_image_csv<R: BufRead>(r: R) -> Result<Image> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty image file".into()))??;
    let dims: Vec<usize> = header
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Format(format!("bad header {header:?}"))))
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Format(format!("header must be rows,cols, got {header:?}")));
    };
    let mut row_major = Vec::with_capacity(rows * cols);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let before = row_major.len();
        for t in line.split(',') {
            row_major.push(t.trim().parse::<f64>().map_err(|_| Error::Format(format!("bad value on line {}", i + 2)))?);
        }
        if row_major.len() - before != cols {
            return Err(Error::Format(format!("line {} has {} values, expected {cols}", i + 2, row_major.len() - before)));
        }
    }
    from_row_major(rows, cols, row_major)
}

pub fn write_image_binary<W: Write>(img: &Image, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(img.rows() as u64).to_le_bytes())?;
    w.write_all(&(img.cols() as u64).to_le_bytes())?;
    for r in 0..img.rows() {
        for c in 0..img.cols() {
            w.write_all(&img.get(r, c).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_image_binary<R: Read>(mut r: R) -> Result<Image> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    let rows = u64::from_le_bytes(buf) as usize;
    r.read_exact(&mut buf)?;
    let cols = u64::from_le_bytes(buf) as usize;
    let mut row_major = Vec::with_capacity(rows.saturating_mul(cols).min(1 << 28));
    for _ in 0..rows * cols {
        r.read_exact(&mut buf)?;
        row_major.push(f64::from_le_bytes(buf));
    }
    from_row_major(rows, cols, row_major)
}

fn from_row_major(rows: usize, cols: usize, row_major: Vec<f64>) -> Result<Image> {
    if row_major.len() != rows * cols {
        return Err(Error::Dimension { expected: rows * cols, got: row_major.len() });
    }
    let img = Image::from_fn(rows, cols, |r, c| row_major[r * cols + c]);
    Image::new(rows, cols, img.into_values())
}
