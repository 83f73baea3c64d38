//! Detection and normalization of inverted (white-on-black) text regions.
//!
//! Per-row white/black pixel counts come straight from the run sums. A row
//! whose black count exceeds its white count is flagged inverted; a majority
//! filter over neighboring rows absorbs the flips that occur at the base of a
//! text line. Flagged row ranges are toggled back to normal polarity by the
//! run-space complement: same run lengths, colors reinterpreted, realized as
//! dropping or prepending the zero-length leading white run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::run_matrix::{RunMatrix, RunMatrixBuilder};

/// Per-row totals of white and black pixels.
#[derive(Debug, Clone)]
pub struct RowHistogram {
    pub white: Vec<u32>,
    pub black: Vec<u32>,
}

impl RowHistogram {
    pub fn len(&self) -> usize {
        self.white.len()
    }

    pub fn is_empty(&self) -> bool {
        self.white.is_empty()
    }
}

/// A maximal inclusive range of inverted rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowRange {
    pub top: u32,
    pub bottom: u32,
}

impl RowRange {
    pub fn new(top: u32, bottom: u32) -> Self {
        debug_assert!(top <= bottom);
        RowRange { top, bottom }
    }

    pub fn height(&self) -> u32 {
        self.bottom - self.top + 1
    }
}

/// Smoothed per-row region indicators plus the derived inverted row ranges.
/// Serializes as the list of `{top, bottom}` ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMap {
    pub delta: Vec<u8>,
    pub inverted: Vec<RowRange>,
}

impl Serialize for RegionMap {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.inverted.serialize(serializer)
    }
}

/// Sums each row's runs into white and black pixel totals.
pub fn row_histograms(matrix: &RunMatrix) -> RowHistogram {
    let m = matrix.height();
    let mut white = Vec::with_capacity(m as usize);
    let mut black = Vec::with_capacity(m as usize);
    for r in 0..m {
        let mut w = 0u32;
        let mut b = 0u32;
        for p in matrix.row_pairs(r) {
            w += p.white;
            b += p.black;
        }
        debug_assert_eq!(w + b, matrix.width());
        white.push(w);
        black.push(b);
    }
    RowHistogram { white, black }
}

/// Marks rows with more black than white pixels as inverted (ties count as
/// normal), applies a majority filter of width `smooth_window` (odd, rows
/// outside the page counting as normal), and extracts the maximal inverted
/// ranges.
pub fn classify_regions(hist: &RowHistogram, smooth_window: u32) -> Result<RegionMap> {
    if smooth_window == 0 || smooth_window.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "smooth_window must be odd and positive, got {smooth_window}"
        )));
    }
    let m = hist.len();
    let raw: Vec<u8> = (0..m)
        .map(|i| u8::from(hist.black[i] > hist.white[i]))
        .collect();

    let delta = if smooth_window == 1 {
        raw
    } else {
        let half = (smooth_window / 2) as isize;
        let majority = smooth_window / 2 + 1;
        (0..m as isize)
            .map(|i| {
                let lo = (i - half).max(0) as usize;
                let hi = ((i + half) as usize).min(m - 1);
                let ones: u32 = raw[lo..=hi].iter().map(|&d| d as u32).sum();
                u8::from(ones >= majority)
            })
            .collect()
    };

    let mut inverted = Vec::new();
    let mut start: Option<u32> = None;
    for (i, &d) in delta.iter().enumerate() {
        match (d, start) {
            (1, None) => start = Some(i as u32),
            (0, Some(s)) => {
                inverted.push(RowRange::new(s, i as u32 - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        inverted.push(RowRange::new(s, m as u32 - 1));
    }
    Ok(RegionMap { delta, inverted })
}

/// Complements every pixel in the given rows, in run space: run lengths are
/// kept and colors flipped, so a leading zero white run is dropped (the left
/// shift) or prepended. Rows outside the range are untouched.
pub fn toggle_rows(matrix: &RunMatrix, rows: RowRange) -> Result<RunMatrix> {
    if rows.bottom >= matrix.height() {
        return Err(Error::OutOfBounds {
            rect: format!("rows [{},{}]", rows.top, rows.bottom),
            height: matrix.height(),
            width: matrix.width(),
        });
    }
    Ok(toggle_ranges(matrix, &[rows]))
}

fn toggle_ranges(matrix: &RunMatrix, ranges: &[RowRange]) -> RunMatrix {
    let mut builder = RunMatrixBuilder::new(matrix.height(), matrix.width());
    let mut next = 0usize;
    for r in 0..matrix.height() {
        while next < ranges.len() && ranges[next].bottom < r {
            next += 1;
        }
        let flip = next < ranges.len() && ranges[next].top <= r && r <= ranges[next].bottom;
        if flip {
            builder.push_row_from_runs(matrix.row_runs(r).map(|(c, l)| (1 - c, l)));
        } else {
            builder.push_row_from_runs(matrix.row_runs(r));
        }
    }
    builder.finish()
}

fn ranges_from_flags(flags: &[bool]) -> Vec<RowRange> {
    let mut ranges = Vec::new();
    let mut start: Option<u32> = None;
    for (i, &f) in flags.iter().enumerate() {
        match (f, start) {
            (true, None) => start = Some(i as u32),
            (false, Some(s)) => {
                ranges.push(RowRange::new(s, i as u32 - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        ranges.push(RowRange::new(s, flags.len() as u32 - 1));
    }
    ranges
}

/// Detects inverted row ranges and toggles them to normal polarity. A
/// document with no inverted rows is returned unchanged.
///
/// Each pass toggles the rows whose raw indicator (black count strictly
/// above white) agrees with the smoothed indicator, and passes repeat until
/// that set is empty. A toggled row becomes strictly white dominant, so the
/// raw set shrinks every pass and the loop terminates; on text documents,
/// where inverted bands are at least `smooth_window` rows tall, the first
/// pass already toggles exactly the smoothed ranges. The returned map
/// records the rows that were toggled.
pub fn normalize_document(matrix: RunMatrix, smooth_window: u32) -> Result<(RunMatrix, RegionMap)> {
    let (out, map) = normalize_cow(std::borrow::Cow::Owned(matrix), smooth_window)?;
    Ok((out.into_owned(), map))
}

/// Copy-on-write variant used by the pipeline: a document with no inverted
/// rows passes through without being cloned.
pub fn normalize_cow(
    matrix: std::borrow::Cow<'_, RunMatrix>,
    smooth_window: u32,
) -> Result<(std::borrow::Cow<'_, RunMatrix>, RegionMap)> {
    let m = matrix.height() as usize;
    let mut work = matrix;
    let mut toggled = vec![false; m];
    loop {
        let hist = row_histograms(&work);
        let map = classify_regions(&hist, smooth_window)?;
        let flags: Vec<bool> = (0..m)
            .map(|i| map.delta[i] == 1 && hist.black[i] > hist.white[i])
            .collect();
        let ranges = ranges_from_flags(&flags);
        if ranges.is_empty() {
            break;
        }
        work = std::borrow::Cow::Owned(toggle_ranges(&work, &ranges));
        for (t, f) in toggled.iter_mut().zip(&flags) {
            debug_assert!(!(*t && *f), "a row never toggles twice");
            *t |= *f;
        }
    }
    let inverted = ranges_from_flags(&toggled);
    let delta = toggled.iter().map(|&t| u8::from(t)).collect();
    Ok((work, RegionMap { delta, inverted }))
}
