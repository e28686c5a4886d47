//! Binary field snapshots.
//!
//! Layout: one ASCII header line `STFE2D 1 <nx> <ny> <Lx> <Ly> <t>\n`
//! followed by `nx * ny` little-endian `f64` values, `j` outer, `i` inner.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

pub const MAGIC: &str = "STFE2D";
pub const VERSION: u32 = 1;

/// Header line for a field at time `t`.
pub fn header(grid: &Grid, t: f64) -> String {
    format!(
        "{MAGIC} {VERSION} {} {} {:?} {:?} {:?}\n",
        grid.nx(),
        grid.ny(),
        grid.lx(),
        grid.ly(),
        t
    )
}

/// Serialized snapshot bytes.
pub fn encode(u: &Field, t: f64) -> Vec<u8> {
    let mut out = header(u.grid(), t).into_bytes();
    out.reserve(8 * u.values().len());
    for v in u.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write_snapshot(path: &Path, u: &Field, t: f64) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode(u, t)).map_err(|e| Error::io(path, e))
}

/// Parsed header: grid and time.
pub fn parse_header(line: &str) -> std::result::Result<(Grid, f64), String> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 7 || parts[0] != MAGIC {
        return Err(format!("not a {MAGIC} snapshot header: {line:?}"));
    }
    if parts[1] != VERSION.to_string() {
        return Err(format!("unsupported snapshot version {}", parts[1]));
    }
    let int = |s: &str| s.parse::<usize>().map_err(|e| format!("bad dimension {s:?}: {e}"));
    let real = |s: &str| s.parse::<f64>().map_err(|e| format!("bad number {s:?}: {e}"));
    let grid = Grid::new(int(parts[2])?, int(parts[3])?, real(parts[4])?, real(parts[5])?)
        .map_err(|e| e.to_string())?;
    Ok((grid, real(parts[6])?))
}

/// Decode snapshot bytes; `path` is only used in error messages.
pub fn decode(bytes: &[u8], path: &Path) -> Result<(Field, f64)> {
    let fmt = |msg: String| Error::Format {
        path: path.to_path_buf(),
        msg,
    };
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| fmt("missing header line".into()))?;
    let line = std::str::from_utf8(&bytes[..nl]).map_err(|_| fmt("header is not UTF-8".into()))?;
    let (grid, t) = parse_header(line).map_err(fmt)?;
    let payload = &bytes[nl + 1..];
    let expected = 8 * grid.len();
    if payload.len() != expected {
        return Err(fmt(format!(
            "payload has {} bytes, expected {expected}",
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((Field::from_values(grid, values)?, t))
}

pub fn read_snapshot(path: &Path) -> Result<(Field, f64)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}
