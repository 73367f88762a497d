//! Matrix file formats.
//!
//! CSV: one row per line, comma separated, '.' decimal, no header.
//! Binary: magic "GLRM", u64 rows, u64 cols (little endian), then
//! rows*cols little-endian f64 values in column-major order.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"GLRM";

pub fn write_csv(m: &DenseMatrix, w: &mut impl Write) -> Result<()> {
    let mut buf = BufWriter::new(w);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                buf.write_all(b",")?;
            }
            // `{}` on f64 is the shortest round-trip form: stable bytes
            // for identical inputs, exact value on re-read.
            write!(buf, "{}", m.get(i, j))?;
        }
        buf.write_all(b"\n")?;
    }
    buf.flush()?;
    Ok(())
}

pub fn read_csv(r: &mut impl Read) -> Result<DenseMatrix> {
    let reader = BufReader::new(r);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let row = trimmed
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {:?}: {e}", lineno + 1, tok)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} fields, got {}",
                    lineno + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty matrix file".into()));
    }
    let (nr, nc) = (rows.len(), rows[0].len());
    let mut data = vec![0.0; nr * nc];
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            data[j * nr + i] = v;
        }
    }
    DenseMatrix::new(nr, nc, data)
}

pub fn write_binary(m: &DenseMatrix, w: &mut impl Write) -> Result<()> {
    let mut buf = BufWriter::new(w);
    buf.write_all(MAGIC)?;
    buf.write_all(&(m.rows() as u64).to_le_bytes())?;
    buf.write_all(&(m.cols() as u64).to_le_bytes())?;
    for v in m.data() {
        buf.write_all(&v.to_le_bytes())?;
    }
    buf.flush()?;
    Ok(())
}

pub fn read_binary(r: &mut impl Read) -> Result<DenseMatrix> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse("bad magic; not a GLRM binary matrix".into()));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let rows = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let cols = u64::from_le_bytes(b8) as usize;
    if rows == 0 || cols == 0 || rows.saturating_mul(cols) > (1 << 32) {
        return Err(Error::Parse(format!("implausible dimensions {rows}x{cols}")));
    }
    let mut data = vec![0.0f64; rows * cols];
    for v in data.iter_mut() {
        r.read_exact(&mut b8)?;
        *v = f64::from_le_bytes(b8);
    }
    DenseMatrix::new(rows, cols, data)
}

/// Read a matrix file, sniffing the binary magic; anything else is CSV.
pub fn read_matrix_path(path: &Path) -> Result<DenseMatrix> {
    let bytes = std::fs::read(path)?;
    if bytes.len() >= 4 && &bytes[..4] == MAGIC {
        read_binary(&mut &bytes[..])
    } else {
        read_csv(&mut &bytes[..])
    }
}

/// Write a matrix atomically (temp file in the same directory + rename).
pub fn write_matrix_path(m: &DenseMatrix, path: &Path, binary: bool) -> Result<()> {
    let mut bytes: Vec<u8> = Vec::new();
    if binary {
        write_binary(m, &mut bytes)?;
    } else {
        write_csv(m, &mut bytes)?;
    }
    write_atomic(path, &bytes)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name().map(|s| s.to_string_lossy().to_string()).unwrap_or_default()
        )),
        None => Path::new(&format!(
            ".{}.tmp",
            path.file_name().map(|s| s.to_string_lossy().to_string()).unwrap_or_default()
        ))
        .to_path_buf(),
    };
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
