//! Virtual vertical decompression of a run matrix.
//!
//! A `ColumnCursor` pops pixel columns left to right from the horizontally
//! compressed data without materializing the bitmap. Each row keeps a working
//! copy of its head pair; popping decrements the head's white run (emitting a
//! 0 transition) or black run (emitting 1), and a consumed head is refilled
//! by shifting the row's next pair in. The shift is applied lazily inside the
//! pop that needs it; padding pairs shift through the same way. A row is
//! terminated once its head is empty and no pairs remain, which happens for
//! all rows simultaneously after the last column.

use crate::error::{Error, Result};
use crate::run_matrix::{RunMatrix, RunPair};

/// Outcome of one pop on one row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PopStatus {
    /// The head pair still held pixels.
    Pop,
    /// The head was exhausted and the next pair was shifted in first.
    ShiftPop,
}

/// Transitions and per-row statuses of one popped pixel column.
#[derive(Debug, Clone, Default)]
pub struct ColumnPop {
    /// One transition value per original row: 0 = white, 1 = black.
    pub transitions: Vec<u8>,
    pub statuses: Vec<PopStatus>,
}

/// One run of a popped column after compressing its transition values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnRun {
    pub color: u8,
    pub length: u32,
}

/// Alternating runs of one pixel column; lengths sum to the row count.
pub type ColumnRuns = Vec<ColumnRun>;

/// Single-owner traversal state over an immutable `RunMatrix`. Rewinding
/// means constructing a fresh cursor; column scans here are single-pass.
pub struct ColumnCursor<'a> {
    matrix: &'a RunMatrix,
    heads: Vec<RunPair>,
    next_pair: Vec<u32>,
    column: u32,
}

impl<'a> ColumnCursor<'a> {
    pub fn new(matrix: &'a RunMatrix) -> Self {
        let heads = (0..matrix.height())
            .map(|r| matrix.row_pairs(r)[0])
            .collect();
        ColumnCursor {
            matrix,
            heads,
            next_pair: vec![1; matrix.height() as usize],
            column: 0,
        }
    }

    /// Index of the next pixel column to pop.
    pub fn column_index(&self) -> u32 {
        self.column
    }

    pub fn is_exhausted(&self) -> bool {
        self.column >= self.matrix.width()
    }

    /// Pops the next pixel column, reusing the output buffers.
    pub fn pop_into(&mut self, out: &mut ColumnPop) -> Result<()> {
        if self.is_exhausted() {
            return Err(Error::CursorExhausted(self.matrix.width()));
        }
        out.transitions.clear();
        out.statuses.clear();
        for r in 0..self.matrix.height() as usize {
            let mut status = PopStatus::Pop;
            loop {
                let head = &mut self.heads[r];
                if head.white > 0 {
                    head.white -= 1;
                    out.transitions.push(0);
                    break;
                }
                if head.black > 0 {
                    head.black -= 1;
                    out.transitions.push(1);
                    break;
                }
                // head is (0,0): shift the next pair in
                let row = self.matrix.row_pairs(r as u32);
                let idx = self.next_pair[r] as usize;
                assert!(
                    idx < row.len(),
                    "row {r} underflow: runs do not cover the width"
                );
                self.heads[r] = row[idx];
                self.next_pair[r] += 1;
                status = PopStatus::ShiftPop;
            }
            out.statuses.push(status);
        }
        self.column += 1;
        Ok(())
    }

    /// Pops the next pixel column. The emitted vector equals that pixel
    /// column of the decoded bitmap.
    pub fn pop_column(&mut self) -> Result<ColumnPop> {
        let mut out = ColumnPop::default();
        self.pop_into(&mut out)?;
        Ok(out)
    }

    /// Remaining run data of one row flattened into `pairs_per_row() * 2`
    /// slots: head white, head black, then the unshifted pairs, zero padded.
    pub fn row_snapshot(&self, row: u32) -> Vec<u32> {
        let slots = self.matrix.pairs_per_row() as usize * 2;
        let mut out = Vec::with_capacity(slots);
        out.push(self.heads[row as usize].white);
        out.push(self.heads[row as usize].black);
        let pairs = self.matrix.row_pairs(row);
        for p in &pairs[self.next_pair[row as usize] as usize..] {
            out.push(p.white);
            out.push(p.black);
        }
        out.resize(slots, 0);
        out
    }
}

/// Run-length compresses one popped column's transition values.
pub fn column_runs(transitions: &[u8]) -> ColumnRuns {
    let mut runs: ColumnRuns = Vec::new();
    for &t in transitions {
        match runs.last_mut() {
            Some(run) if run.color == t => run.length += 1,
            _ => runs.push(ColumnRun {
                color: t,
                length: 1,
            }),
        }
    }
    runs
}
