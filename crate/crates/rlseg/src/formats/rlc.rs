//! RLC container: the canonical compressed document file.
//!
//! Little-endian binary layout: magic "RLC1", u32 row count m, u32 pixel
//! width n, u32 pairs per row, then m x pairs-per-row x 2 u32 run lengths in
//! row-major (white, black) order, rows padded with (0,0) pairs.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::run_matrix::{RunMatrix, RunPair};

const MAGIC: &[u8; 4] = b"RLC1";

pub fn read_rlc(reader: &mut impl Read) -> Result<RunMatrix> {
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!(
            "not an RLC file (magic {:?})",
            String::from_utf8_lossy(&magic)
        )));
    }
    let mut word = [0u8; 4];
    let mut next = || -> Result<u32> {
        reader.read_exact(&mut word)?;
        Ok(u32::from_le_bytes(word))
    };
    let height = next()?;
    let width = next()?;
    let pairs_per_row = next()?;
    if height == 0 || width == 0 || pairs_per_row == 0 {
        return Err(Error::Format("zero RLC dimension".into()));
    }
    let total = (height as u64) * (pairs_per_row as u64);
    if total > 1 << 28 {
        return Err(Error::Format("RLC dimensions unreasonably large".into()));
    }
    let mut rows = Vec::with_capacity(height as usize);
    for _ in 0..height {
        let mut row = Vec::with_capacity(pairs_per_row as usize);
        for _ in 0..pairs_per_row {
            let white = next()?;
            let black = next()?;
            row.push(RunPair::new(white, black));
        }
        rows.push(row);
    }
    RunMatrix::from_pairs(height, width, &rows)
}

pub fn write_rlc(writer: &mut impl Write, matrix: &RunMatrix) -> Result<()> {
    writer.write_all(MAGIC)?;
    let pairs_per_row = matrix.pairs_per_row();
    writer.write_all(&matrix.height().to_le_bytes())?;
    writer.write_all(&matrix.width().to_le_bytes())?;
    writer.write_all(&pairs_per_row.to_le_bytes())?;
    for r in 0..matrix.height() {
        let row = matrix.row_pairs(r);
        for pair in row {
            writer.write_all(&pair.white.to_le_bytes())?;
            writer.write_all(&pair.black.to_le_bytes())?;
        }
        for _ in row.len()..pairs_per_row as usize {
            writer.write_all(&[0u8; 8])?;
        }
    }
    Ok(())
}
