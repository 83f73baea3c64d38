//! Run-length compressed document representation.
//!
//! A `RunMatrix` stores one row of alternating white/black run-length pairs
//! per pixel row, white run first. Rows that begin with a black pixel carry a
//! zero-length leading white run, which keeps the strict white-first
//! alternation and makes the toggle left-shift well defined. Rows are held in
//! canonical form: no interior zero-length run precedes a positive run, a
//! zero white run may appear only as the very first run, and trailing (0,0)
//! padding pairs are implicit (the logical pair count per row is the maximum
//! over all rows; the file codec materializes the padding).

use crate::bitmap::{Bitmap, BLACK, WHITE};
use crate::error::{Error, Result};
use crate::geom::Rect;

/// One (white, black) run-length pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunPair {
    pub white: u32,
    pub black: u32,
}

impl RunPair {
    pub const ZERO: RunPair = RunPair { white: 0, black: 0 };

    pub fn new(white: u32, black: u32) -> Self {
        RunPair { white, black }
    }
}

/// Run-length compressed binary document.
///
/// Rows are stored back to back in one flat buffer with per-row offsets;
/// padding pairs are not materialized.
#[derive(Clone, PartialEq, Eq)]
pub struct RunMatrix {
    height: u32,
    width: u32,
    pairs: Vec<RunPair>,
    row_offsets: Vec<u32>,
}

impl RunMatrix {
    /// Compresses a bitmap row by row. Every bitmap is encodable; the result
    /// is canonical and round-trips exactly.
    pub fn from_bitmap(bitmap: &Bitmap) -> RunMatrix {
        let mut builder = RunMatrixBuilder::new(bitmap.height(), bitmap.width());
        for r in 0..bitmap.height() {
            builder.push_row_from_runs(pixel_runs(bitmap.row(r)));
        }
        builder.finish_unchecked()
    }

    /// Builds a matrix from raw run pairs, validating row sums against the
    /// width and canonicalizing each row (merging runs split by interior
    /// zeros, trimming padding).
    pub fn from_pairs(height: u32, width: u32, rows: &[Vec<RunPair>]) -> Result<RunMatrix> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidRunMatrix("zero dimension".into()));
        }
        if rows.len() != height as usize {
            return Err(Error::InvalidRunMatrix(format!(
                "{} rows supplied for height {}",
                rows.len(),
                height
            )));
        }
        let mut builder = RunMatrixBuilder::new(height, width);
        for (i, row) in rows.iter().enumerate() {
            let sum: u64 = row.iter().map(|p| p.white as u64 + p.black as u64).sum();
            if sum != width as u64 {
                return Err(Error::InvalidRunMatrix(format!(
                    "row {i} runs sum to {sum}, expected {width}"
                )));
            }
            builder.push_row_from_runs(
                row.iter()
                    .flat_map(|p| [(WHITE, p.white), (BLACK, p.black)]),
            );
        }
        Ok(builder.finish_unchecked())
    }

    /// Decompresses to a bitmap. The inverse codec is used only by tests,
    /// CLI export, and the reference path, never by the segmentation path.
    pub fn to_bitmap(&self) -> Bitmap {
        let mut pixels = Vec::with_capacity(self.height as usize * self.width as usize);
        for r in 0..self.height {
            for (color, len) in self.row_runs(r) {
                pixels.resize(pixels.len() + len as usize, color);
            }
        }
        Bitmap::from_pixels(self.height, self.width, pixels)
            .expect("canonical rows sum to the row width")
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Run pairs of one row, without trailing padding.
    pub fn row_pairs(&self, row: u32) -> &[RunPair] {
        let start = self.row_offsets[row as usize] as usize;
        let end = self.row_offsets[row as usize + 1] as usize;
        &self.pairs[start..end]
    }

    /// Logical pair count per row: the maximum over rows of
    /// ceil((transitions + 1) / 2). Shorter rows are implicitly padded with
    /// (0,0) pairs up to this count.
    pub fn pairs_per_row(&self) -> u32 {
        (0..self.height)
            .map(|r| self.row_pairs(r).len() as u32)
            .max()
            .unwrap_or(1)
            .max(1)
    }

    /// Iterates one row as alternating `(color, length)` runs, zero-length
    /// runs skipped except that nothing is emitted for padding.
    pub fn row_runs(&self, row: u32) -> impl Iterator<Item = (u8, u32)> + '_ {
        self.row_pairs(row)
            .iter()
            .flat_map(|p| [(WHITE, p.white), (BLACK, p.black)])
            .filter(|&(_, len)| len > 0)
    }

    /// Total heap bytes held by the run data (capacity-based).
    pub fn heap_bytes(&self) -> usize {
        self.pairs.capacity() * std::mem::size_of::<RunPair>()
            + self.row_offsets.capacity() * std::mem::size_of::<u32>()
    }

    /// Extracts a rectangular sub-document in compressed form. Runs
    /// straddling the rectangle edges are split by run arithmetic; rows are
    /// never decompressed.
    pub fn crop(&self, rect: Rect) -> Result<RunMatrix> {
        if rect.bottom >= self.height || rect.right >= self.width {
            return Err(Error::OutOfBounds {
                rect: format!("{rect:?}"),
                height: self.height,
                width: self.width,
            });
        }
        let mut builder = RunMatrixBuilder::new(rect.height(), rect.width());
        let (left, right) = (rect.left as u64, rect.right as u64);
        for r in rect.top..=rect.bottom {
            let mut pos = 0u64; // column of the next unvisited pixel
            let mut clipped: Vec<(u8, u32)> = Vec::new();
            for (color, len) in self.row_runs(r) {
                let start = pos;
                let end = pos + len as u64; // exclusive
                pos = end;
                if end <= left {
                    continue;
                }
                if start > right {
                    break;
                }
                let lo = start.max(left);
                let hi = end.min(right + 1);
                clipped.push((color, (hi - lo) as u32));
            }
            builder.push_row_from_runs(clipped.into_iter());
        }
        Ok(builder.finish_unchecked())
    }

    /// Converts every black run shorter than `min_black` to white and merges
    /// the surrounding white runs. `min_black == 0` is the identity.
    pub fn despeckle(&self, min_black: u32) -> RunMatrix {
        if min_black == 0 {
            return self.clone();
        }
        let mut builder = RunMatrixBuilder::new(self.height, self.width);
        for r in 0..self.height {
            builder.push_row_from_runs(self.row_runs(r).map(|(color, len)| {
                if color == BLACK && len < min_black {
                    (WHITE, len)
                } else {
                    (color, len)
                }
            }));
        }
        builder.finish_unchecked()
    }
}

impl std::fmt::Debug for RunMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "RunMatrix({}x{}, {} pairs)",
            self.height,
            self.width,
            self.pairs.len()
        )
    }
}

/// Incremental row-by-row constructor producing canonical rows.
pub struct RunMatrixBuilder {
    height: u32,
    width: u32,
    pairs: Vec<RunPair>,
    row_offsets: Vec<u32>,
    // scratch for the row being assembled: alternating colors, first white
    pending_white: Option<u32>,
    last: Option<(u8, u32)>,
}

impl RunMatrixBuilder {
    pub fn new(height: u32, width: u32) -> Self {
        RunMatrixBuilder {
            height,
            width,
            pairs: Vec::new(),
            row_offsets: vec![0],
            pending_white: None,
            last: None,
        }
    }

    /// Appends one row given as `(color, length)` runs in pixel order.
    /// Zero-length runs are dropped and same-color neighbors merged.
    pub fn push_row_from_runs(&mut self, runs: impl Iterator<Item = (u8, u32)>) {
        debug_assert!(self.pending_white.is_none() && self.last.is_none());
        let mut sum = 0u64;
        for (color, len) in runs {
            if len == 0 {
                continue;
            }
            sum += len as u64;
            match self.last {
                Some((c, l)) if c == color => self.last = Some((c, l + len)),
                Some((c, l)) => {
                    self.emit_run(c, l);
                    self.last = Some((color, len));
                }
                None => self.last = Some((color, len)),
            }
        }
        debug_assert_eq!(sum, self.width as u64, "row runs must sum to the width");
        if let Some((c, l)) = self.last.take() {
            self.emit_run(c, l);
        }
        // flush a dangling white half-pair (row ending in white)
        if let Some(w) = self.pending_white.take() {
            self.pairs.push(RunPair::new(w, 0));
        }
        // an entirely empty row cannot occur for width > 0, but keep the
        // offsets consistent regardless
        if self.row_offsets.last().copied().unwrap() as usize == self.pairs.len() {
            self.pairs.push(RunPair::new(self.width, 0));
        }
        self.row_offsets.push(self.pairs.len() as u32);
    }

    fn emit_run(&mut self, color: u8, len: u32) {
        if color == WHITE {
            debug_assert!(self.pending_white.is_none());
            self.pending_white = Some(len);
        } else {
            let white = self.pending_white.take().unwrap_or(0);
            self.pairs.push(RunPair::new(white, len));
        }
    }

    /// Finishes construction. Callers must have pushed exactly `height` rows
    /// whose runs sum to `width`; the push paths above guarantee both.
    pub fn finish(self) -> RunMatrix {
        self.finish_unchecked()
    }

    fn finish_unchecked(self) -> RunMatrix {
        debug_assert_eq!(self.row_offsets.len(), self.height as usize + 1);
        RunMatrix {
            height: self.height,
            width: self.width,
            pairs: self.pairs,
            row_offsets: self.row_offsets,
        }
    }
}

/// Run-length encodes one pixel row.
fn pixel_runs(row: &[u8]) -> impl Iterator<Item = (u8, u32)> + '_ {
    let mut i = 0usize;
    std::iter::from_fn(move || {
        if i >= row.len() {
            return None;
        }
        let color = row[i];
        let start = i;
        while i < row.len() && row[i] == color {
            i += 1;
        }
        Some((color, (i - start) as u32))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(pairs: &[(u32, u32)]) -> Vec<RunPair> {
        pairs.iter().map(|&(w, b)| RunPair::new(w, b)).collect()
    }

    #[test]
    fn encodes_all_white() {
        let b = Bitmap::new(3, 4).unwrap();
        let m = RunMatrix::from_bitmap(&b);
        for r in 0..3 {
            assert_eq!(m.row_pairs(r), &[RunPair::new(4, 0)]);
        }
        assert_eq!(m.pairs_per_row(), 1);
    }

    #[test]
    fn encodes_all_black_with_leading_zero_white() {
        let b = Bitmap::from_pixels(2, 5, vec![1; 10]).unwrap();
        let m = RunMatrix::from_bitmap(&b);
        for r in 0..2 {
            assert_eq!(m.row_pairs(r), &[RunPair::new(0, 5)]);
        }
    }

    #[test]
    fn encodes_mixed_row() {
        // runs 2,2,4,5,1 over width 14
        let pixels = vec![0, 0, 1, 1, 0, 0, 0, 0, 1, 1, 1, 1, 1, 0];
        let b = Bitmap::from_pixels(1, 14, pixels).unwrap();
        let m = RunMatrix::from_bitmap(&b);
        assert_eq!(
            m.row_pairs(0),
            &[RunPair::new(2, 2), RunPair::new(4, 5), RunPair::new(1, 0)]
        );
    }

    #[test]
    fn decodes_mixed_row() {
        let m = RunMatrix::from_pairs(1, 14, &[row(&[(2, 2), (4, 5), (1, 0)])]).unwrap();
        let b = m.to_bitmap();
        assert_eq!(b.row(0), &[0, 0, 1, 1, 0, 0, 0, 0, 1, 1, 1, 1, 1, 0]);
    }

    #[test]
    fn decodes_single_black_run() {
        let m = RunMatrix::from_pairs(1, 5, &[row(&[(0, 5)])]).unwrap();
        assert_eq!(m.to_bitmap().row(0), &[1, 1, 1, 1, 1]);
    }

    #[test]
    fn from_pairs_rejects_bad_row_sum() {
        let err = RunMatrix::from_pairs(1, 10, &[row(&[(4, 5)])]).unwrap_err();
        assert!(matches!(err, Error::InvalidRunMatrix(_)));
    }

    #[test]
    fn from_pairs_canonicalizes_interior_zeros_and_padding() {
        // (3,0),(0,0),(2,5) carries an interior zero pair; canonical form is (5,5)
        let m = RunMatrix::from_pairs(1, 10, &[row(&[(3, 0), (0, 0), (2, 5)])]).unwrap();
        assert_eq!(m.row_pairs(0), &[RunPair::new(5, 5)]);
    }

    #[test]
    fn crop_identity() {
        let m = RunMatrix::from_pairs(
            2,
            14,
            &[row(&[(2, 2), (4, 5), (1, 0)]), row(&[(14, 0)])],
        )
        .unwrap();
        let c = m.crop(Rect::new(0, 1, 0, 13)).unwrap();
        assert_eq!(c, m);
    }

    #[test]
    fn crop_splits_straddling_runs() {
        let m = RunMatrix::from_pairs(1, 14, &[row(&[(2, 2), (4, 5), (1, 0)])]).unwrap();
        // columns 1..=6 of 0,0,1,1,0,0,0,0,1,1,1,1,1,0 are 0,1,1,0,0,0
        let c = m.crop(Rect::new(0, 0, 1, 6)).unwrap();
        assert_eq!(c.row_pairs(0), &[RunPair::new(1, 2), RunPair::new(3, 0)]);
    }

    #[test]
    fn crop_all_white_keeps_dimensions() {
        let m = RunMatrix::from_bitmap(&Bitmap::new(6, 9).unwrap());
        let c = m.crop(Rect::new(1, 3, 2, 5)).unwrap();
        assert_eq!((c.height(), c.width()), (3, 4));
        assert_eq!(c.row_pairs(0), &[RunPair::new(4, 0)]);
    }

    #[test]
    fn crop_rejects_out_of_bounds() {
        let m = RunMatrix::from_bitmap(&Bitmap::new(4, 4).unwrap());
        assert!(matches!(
            m.crop(Rect::new(0, 4, 0, 3)),
            Err(Error::OutOfBounds { .. })
        ));
    }

    #[test]
    fn despeckle_zero_is_identity() {
        let m = RunMatrix::from_pairs(1, 10, &[row(&[(3, 1), (3, 1), (2, 0)])]).unwrap();
        assert_eq!(m.despeckle(0), m);
    }

    #[test]
    fn despeckle_removes_short_black_runs() {
        let m = RunMatrix::from_pairs(1, 10, &[row(&[(3, 1), (3, 1), (2, 0)])]).unwrap();
        assert_eq!(m.despeckle(2).row_pairs(0), &[RunPair::new(10, 0)]);
    }

    #[test]
    fn despeckle_keeps_runs_at_threshold() {
        let m = RunMatrix::from_pairs(1, 5, &[row(&[(0, 5)])]).unwrap();
        assert_eq!(m.despeckle(2).row_pairs(0), &[RunPair::new(0, 5)]);
    }

    #[test]
    fn pairs_per_row_matches_transition_count() {
        let m = RunMatrix::from_pairs(
            3,
            14,
            &[
                row(&[(14, 0)]),
                row(&[(2, 2), (4, 5), (1, 0)]),
                row(&[(1, 4), (3, 5), (1, 0)]),
            ],
        )
        .unwrap();
        assert_eq!(m.pairs_per_row(), 3);
    }

    fn arb_bitmap(max_dim: u32) -> impl Strategy<Value = Bitmap> {
        (1..=max_dim, 1..=max_dim).prop_flat_map(|(h, w)| {
            proptest::collection::vec(0u8..=1, (h * w) as usize)
                .prop_map(move |px| Bitmap::from_pixels(h, w, px).unwrap())
        })
    }

    proptest! {
        #[test]
        fn roundtrip_encode_decode(b in arb_bitmap(24)) {
            let m = RunMatrix::from_bitmap(&b);
            prop_assert_eq!(m.to_bitmap(), b);
        }

        #[test]
        fn rows_sum_to_width(b in arb_bitmap(24)) {
            let m = RunMatrix::from_bitmap(&b);
            for r in 0..m.height() {
                let sum: u64 = m.row_pairs(r).iter().map(|p| p.white as u64 + p.black as u64).sum();
                prop_assert_eq!(sum, m.width() as u64);
            }
        }

        #[test]
        fn crop_composes(b in arb_bitmap(20), fracs in [0.0f64..1.0, 0.0..1.0, 0.0..1.0, 0.0..1.0]) {
            let m = RunMatrix::from_bitmap(&b);
            let (h, w) = (b.height(), b.width());
            let t1 = (fracs[0] * h as f64) as u32 % h;
            let l1 = (fracs[1] * w as f64) as u32 % w;
            let outer = Rect::new(t1, h - 1, l1, w - 1);
            let c1 = m.crop(outer).unwrap();
            let t2 = (fracs[2] * outer.height() as f64) as u32 % outer.height();
            let l2 = (fracs[3] * outer.width() as f64) as u32 % outer.width();
            let inner_rel = Rect::new(t2, outer.height() - 1, l2, outer.width() - 1);
            let c2 = c1.crop(inner_rel).unwrap();
            let composed = Rect::new(t1 + t2, h - 1, l1 + l2, w - 1);
            prop_assert_eq!(c2, m.crop(composed).unwrap());
        }

        #[test]
        fn despeckle_matches_pixel_oracle(b in arb_bitmap(20), min_black in 0u32..6) {
            let m = RunMatrix::from_bitmap(&b).despeckle(min_black);
            // oracle: zero out short black runs on the decoded rows
            let mut expect = b.clone();
            for r in 0..expect.height() {
                let w = expect.width();
                let row = expect.row_mut(r);
                let mut c = 0usize;
                while c < w as usize {
                    if row[c] == BLACK {
                        let start = c;
                        while c < w as usize && row[c] == BLACK { c += 1; }
                        if ((c - start) as u32) < min_black {
                            row[start..c].fill(WHITE);
                        }
                    } else {
                        c += 1;
                    }
                }
            }
            prop_assert_eq!(m.to_bitmap(), expect);
        }
    }
}
