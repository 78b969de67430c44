//! Binary ensemble files.
//!
//! Little-endian: `N, n, nPaths, seed` as `u64`, then `T` as `f64`, then
//! `nPaths·(n+1)·N` values as `f64`, path-major, time-major, mode-minor.

use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use timereg::{PathEnsemble, TimeGrid};

const HEADER: usize = 40;

pub fn write_ensemble<W: Write>(mut w: W, e: &PathEnsemble) -> io::Result<()> {
    for v in [e.modes as u64, e.grid.steps() as u64, e.n_paths as u64, e.seed] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&e.grid.horizon().to_le_bytes())?;
    for v in e.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()
}

pub fn read_ensemble<R: Read>(mut r: R) -> io::Result<PathEnsemble> {
    let invalid = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
    let mut head = [0u8; HEADER];
    r.read_exact(&mut head)?;
    let word = |i: usize| u64::from_le_bytes(head[8 * i..8 * i + 8].try_into().unwrap());
    let (modes, steps, n_paths, seed) = (word(0), word(1), word(2), word(3));
    let horizon = f64::from_le_bytes(head[32..40].try_into().unwrap());
    let count = (steps + 1)
        .checked_mul(modes)
        .and_then(|v| v.checked_mul(n_paths))
        .and_then(|v| usize::try_from(v).ok())
        .ok_or_else(|| invalid("ensemble header sizes overflow".into()))?;
    let grid = TimeGrid::new(horizon, steps as usize).map_err(|e| invalid(e.to_string()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * count {
        return Err(invalid(format!("expected {} value bytes, found {}", 8 * count, bytes.len())));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    PathEnsemble::from_values(grid, seed, modes as usize, n_paths as usize, values).map_err(|e| invalid(e.to_string()))
}

pub fn save(path: &Path, e: &PathEnsemble) -> io::Result<()> {
    write_ensemble(BufWriter::new(std::fs::File::create(path)?), e)
}

pub fn load(path: &Path) -> io::Result<PathEnsemble> {
    read_ensemble(BufReader::new(std::fs::File::open(path)?))
}
