//! On-disk cache of assembled transition systems.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic      4 bytes  "LCRT"
//! version    u8       1
//! n          u32      players
//! t          u64      transient states
//! a          u64      absorbing states
//! Q block    nnz: u64, row_ptr: (t + 1) x u64, col_idx: nnz x u32, values: nnz x f64
//! R block    same layout as Q
//! ```
//!
//! The absorbing-winner map is not stored; it is recomputed from the index.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{LcrError, Result};
use crate::sparse::CsrMatrix;
use crate::state_space::StateSpace;

use super::TransitionSystem;

pub const CACHE_MAGIC: &[u8; 4] = b"LCRT";
pub const CACHE_VERSION: u8 = 1;

fn write_csr<W: Write>(w: &mut W, m: &CsrMatrix) -> Result<()> {
    w.write_all(&(m.nnz() as u64).to_le_bytes())?;
    for &p in m.row_ptr() {
        w.write_all(&(p as u64).to_le_bytes())?;
    }
    for &c in m.col_idx() {
        w.write_all(&c.to_le_bytes())?;
    }
    for &v in m.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_csr<R: Read>(r: &mut R, rows: usize, cols: usize) -> Result<CsrMatrix> {
    let nnz = read_u64(r)? as usize;
    let mut row_ptr = Vec::with_capacity(rows + 1);
    for _ in 0..=rows {
        row_ptr.push(read_u64(r)? as usize);
    }
    if row_ptr[0] != 0 || row_ptr[rows] != nnz || row_ptr.windows(2).any(|w| w[0] > w[1]) {
        return Err(LcrError::CacheFormat("inconsistent row pointers".into()));
    }
    let mut col_idx = Vec::with_capacity(nnz);
    let mut buf4 = [0u8; 4];
    for _ in 0..nnz {
        r.read_exact(&mut buf4)?;
        let c = u32::from_le_bytes(buf4);
        if c as usize >= cols {
            return Err(LcrError::CacheFormat(format!("column {c} out of range")));
        }
        col_idx.push(c);
    }
    let mut values = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        values.push(f64::from_bits(read_u64(r)?));
    }
    Ok(CsrMatrix::from_parts(rows, cols, row_ptr, col_idx, values))
}

pub fn write_system<W: Write>(w: &mut W, system: &TransitionSystem) -> Result<()> {
    let meta = system.meta();
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&[CACHE_VERSION])?;
    w.write_all(&(meta.n as u32).to_le_bytes())?;
    w.write_all(&(meta.transient as u64).to_le_bytes())?;
    w.write_all(&(meta.absorbing as u64).to_le_bytes())?;
    write_csr(w, system.q())?;
    write_csr(w, system.r())?;
    Ok(())
}

pub fn read_system<R: Read>(r: &mut R) -> Result<TransitionSystem> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CACHE_MAGIC {
        return Err(LcrError::CacheFormat("bad magic".into()));
    }
    let mut version = [0u8; 1];
    r.read_exact(&mut version)?;
    if version[0] != CACHE_VERSION {
        return Err(LcrError::CacheFormat(format!(
            "unsupported version {}",
            version[0]
        )));
    }
    let mut n = [0u8; 4];
    r.read_exact(&mut n)?;
    let n = u32::from_le_bytes(n) as usize;
    let space = StateSpace::new(n)?;
    let t = read_u64(r)? as usize;
    let a = read_u64(r)? as usize;
    if t != space.transient() || a != space.absorbing() {
        return Err(LcrError::CacheFormat(format!(
            "header sizes {t}/{a} do not match {n} players"
        )));
    }
    let q = read_csr(r, t, t)?;
    let rm = read_csr(r, t, a)?;
    TransitionSystem::from_blocks(space, q, rm)
}

pub fn save_system(system: &TransitionSystem, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_system(&mut w, system)?;
    w.flush()?;
    Ok(())
}

pub fn load_system(path: &Path) -> Result<TransitionSystem> {
    read_system(&mut BufReader::new(File::open(path)?))
}
