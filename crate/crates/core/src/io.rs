//! On-disk formats: the binary matrix file, CSV traces and text exports.
//!
//! Binary matrix layout (all little endian):
//!
//! ```text
//! bytes 0..8   magic "ACMORM01"
//! bytes 8..16  rows (u64)
//! bytes 16..24 cols (u64)
//! then rows * cols f64 values, column major
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use faer::{Col, Mat};

use crate::error::Error;
use crate::Result;

pub const MATRIX_MAGIC: &[u8; 8] = b"ACMORM01";

/// Write a dense matrix in the binary column-major format.
pub fn write_matrix(path: &Path, m: &Mat<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MATRIX_MAGIC)?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            w.write_all(&m[(r, c)].to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a dense matrix written by [`write_matrix`].
pub fn read_matrix(path: &Path) -> Result<Mat<f64>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|_| Error::MatrixFormat("file shorter than the header".into()))?;
    if &magic != MATRIX_MAGIC {
        return Err(Error::MatrixFormat(format!(
            "bad magic {:?}, expected {:?}",
            magic, MATRIX_MAGIC
        )));
    }
    let mut buf8 = [0u8; 8];
    r.read_exact(&mut buf8)?;
    let rows = u64::from_le_bytes(buf8) as usize;
    r.read_exact(&mut buf8)?;
    let cols = u64::from_le_bytes(buf8) as usize;
    let mut data = vec![0.0f64; rows * cols];
    for v in data.iter_mut() {
        r.read_exact(&mut buf8)
            .map_err(|_| Error::MatrixFormat("file truncated before rows*cols values".into()))?;
        *v = f64::from_le_bytes(buf8);
    }
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(Error::MatrixFormat("trailing bytes after the data block".into()));
    }
    Ok(Mat::from_fn(rows, cols, |i, j| data[j * rows + i]))
}

/// Write a column vector as an `n x 1` matrix file.
pub fn write_vector(path: &Path, v: &Col<f64>) -> Result<()> {
    let m = Mat::from_fn(v.nrows(), 1, |i, _| v[i]);
    write_matrix(path, &m)
}

pub fn read_vector(path: &Path) -> Result<Col<f64>> {
    let m = read_matrix(path)?;
    if m.ncols() != 1 {
        return Err(Error::MatrixFormat(format!("expected a vector, got {} columns", m.ncols())));
    }
    Ok(m.col(0).to_owned())
}

/// CSV with a header row; each record is formatted with full precision.
pub fn write_csv(path: &Path, header: &str, rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{header}")?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Energy trace `(t, energy)` per time level.
pub fn write_energy_csv(path: &Path, t0: f64, dt: f64, energies: &[f64]) -> Result<()> {
    write_csv(
        path,
        "t,energy",
        energies.iter().enumerate().map(|(n, &e)| vec![t0 + n as f64 * dt, e]),
    )
}

/// Read back the numeric columns of a CSV written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        out.push(row.map_err(|e| Error::MatrixFormat(format!("bad CSV number: {e}")))?);
    }
    Ok(out)
}

/// Sparse matrix in `row col value` coordinate text format (0-based).
pub fn write_coo(path: &Path, m: faer::sparse::SparseColMatRef<'_, usize, f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "% rows {} cols {} nnz {}", m.nrows(), m.ncols(), m.compute_nnz())?;
    let symbolic = m.symbolic();
    let col_ptr = symbolic.col_ptr();
    let row_idx = symbolic.row_idx();
    let val = m.val();
    for c in 0..m.ncols() {
        for k in col_ptr[c]..col_ptr[c + 1] {
            writeln!(w, "{} {} {:.17e}", row_idx[k], c, val[k])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Mesh export: `vertices.csv` (x, y) and `triangles.csv` (vertex ids).
pub fn write_mesh_csv(dir: &Path, mesh: &crate::mesh::Mesh) -> Result<()> {
    write_csv(
        &dir.join("vertices.csv"),
        "x,y",
        mesh.vertices.iter().map(|&(x, y)| vec![x, y]),
    )?;
    let mut w = BufWriter::new(File::create(dir.join("triangles.csv"))?);
    writeln!(w, "v0,v1,v2")?;
    for t in &mesh.triangles {
        writeln!(w, "{},{},{}", t[0], t[1], t[2])?;
    }
    w.flush()?;
    Ok(())
}

/// Key-value text report (one `key = value` line each).
pub fn write_report(path: &Path, entries: &[(&str, String)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (k, v) in entries {
        writeln!(w, "{k} = {v}")?;
    }
    w.flush()?;
    Ok(())
}
