//! Binary snapshot files and their CSV mirror.
//!
//! Layout, all integers and floats little-endian:
//!
//! | field          | type                  |
//! |----------------|-----------------------|
//! | magic          | `b"ACTLSNAP"`         |
//! | version        | `u32`                 |
//! | rows `N`       | `u64`                 |
//! | cols `N_t + 1` | `u64`                 |
//! | label length   | `u32`, then UTF-8     |
//! | parameter dim  | `u32`, then `f64`s    |
//! | time grid      | `cols` × `f64`        |
//! | payload        | `rows × cols` `f64`, row-major |

use std::fs;
use std::path::Path;

use actlearn_core::linalg::Matrix;
use actlearn_core::pod::SnapshotMatrix;

use crate::error::{CliError, FormatError};
use crate::report::{fmt_f64, CsvTable};

pub const MAGIC: &[u8; 8] = b"ACTLSNAP";
pub const VERSION: u32 = 1;

/// Serializes into the binary layout.
pub fn encode(s: &SnapshotMatrix) -> Vec<u8> {
    let (rows, cols) = s.data().shape();
    let label = s.label().as_bytes();
    let mut out = Vec::with_capacity(40 + label.len() + 8 * (s.parameter().len() + cols * (rows + 1)));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(rows as u64).to_le_bytes());
    out.extend_from_slice(&(cols as u64).to_le_bytes());
    out.extend_from_slice(&(label.len() as u32).to_le_bytes());
    out.extend_from_slice(label);
    out.extend_from_slice(&(s.parameter().len() as u32).to_le_bytes());
    for &p in s.parameter() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    for &t in s.time_grid() {
        out.extend_from_slice(&t.to_le_bytes());
    }
    for i in 0..rows {
        for j in 0..cols {
            out.extend_from_slice(&s.data()[(i, j)].to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            FormatError::Header {
                path: self.path.to_path_buf(),
                reason: format!("file ends inside {what}"),
            }
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>, FormatError> {
        let len = n.checked_mul(8).ok_or_else(|| self.header(format!("{what} too large")))?;
        Ok(self
            .take(len, what)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn header(&self, reason: String) -> FormatError {
        FormatError::Header {
            path: self.path.to_path_buf(),
            reason,
        }
    }
}

/// Parses the binary layout; `path` only labels errors.
pub fn decode(bytes: &[u8], path: &Path) -> Result<SnapshotMatrix, CliError> {
    let mut r = Reader { bytes, pos: 0, path };
    if r.take(8, "magic").ok() != Some(MAGIC.as_slice()) {
        return Err(FormatError::BadMagic { path: path.to_path_buf() }.into());
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(FormatError::Version {
            path: path.to_path_buf(),
            found: version,
            expected: VERSION,
        }
        .into());
    }
    let rows = usize::try_from(r.u64("rows")?).map_err(|_| r.header("row count overflows".into()))?;
    let cols = usize::try_from(r.u64("cols")?).map_err(|_| r.header("column count overflows".into()))?;
    let label_len = r.u32("label length")? as usize;
    let label = std::str::from_utf8(r.take(label_len, "label")?)
        .map_err(|_| r.header("label is not UTF-8".into()))?
        .to_owned();
    let dim = r.u32("parameter dimension")? as usize;
    let parameter = r.f64s(dim, "parameter")?;
    let time_grid = r.f64s(cols, "time grid")?;
    let count = rows.checked_mul(cols).ok_or_else(|| r.header("payload size overflows".into()))?;
    let payload = r.f64s(count, "payload")?;
    if r.pos != bytes.len() {
        return Err(r.header(format!("{} trailing bytes", bytes.len() - r.pos)).into());
    }
    let data = Matrix::from_row_slice(rows, cols, &payload).map_err(|e| r.header(e.to_string()))?;
    Ok(SnapshotMatrix::new(data, time_grid, parameter, label)?)
}

pub fn save(path: &Path, s: &SnapshotMatrix) -> Result<(), CliError> {
    fs::write(path, encode(s)).map_err(|e| CliError::io(path, e))
}

pub fn load(path: &Path) -> Result<SnapshotMatrix, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode(&bytes, path)
}

/// Long-format CSV mirror: one row per `(node, time)` pair.
pub fn csv_table(s: &SnapshotMatrix, nodes: &[f64]) -> CsvTable {
    let mut t = CsvTable::new(["node", "x", "t", s.label()]);
    let (rows, cols) = s.data().shape();
    for j in 0..cols {
        for i in 0..rows {
            let x = nodes.get(i).copied().unwrap_or(f64::NAN);
            t.push([i.to_string(), fmt_f64(x), fmt_f64(s.time_grid()[j]), fmt_f64(s.data()[(i, j)])]);
        }
    }
    t
}
