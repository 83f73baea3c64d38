//! Vertical column separator detection and column block extraction.
//!
//! A pixel column is a separator candidate when its virtually popped run
//! sequence contains a white run at least `min_run_length` long. Maximal
//! contiguous candidate groups whose width falls inside the configured
//! bounds become separators; groups touching the page edges are discarded.
//! When every column of a group holds two or more qualifying runs the group
//! encodes stacked gutters of different bands and yields one separator per
//! stacked run, all sharing an overlap group id.
//!
//! Separator geometry comes from averaging the qualifying runs across the
//! group's columns: the run lengths give the separator length, the rows
//! above the run give its start row, and the end row is start plus length.

use serde::Serialize;

use crate::cursor::{column_runs, ColumnCursor, ColumnPop, ColumnRuns};
use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::inverted::normalize_document;
use crate::run_matrix::RunMatrix;

/// Thresholds governing separator detection.
#[derive(Debug, Clone)]
pub struct SeparatorParams {
    /// Minimum white-run length for a candidate column, in pixels.
    pub min_run_length: u32,
    /// Inclusive separator width bounds, in pixels.
    pub min_width: u32,
    pub max_width: u32,
    /// Discard candidate groups touching column 0 or n-1.
    pub remove_edges: bool,
    /// Round .5 averages up (down when false).
    pub round_ties_up: bool,
}

impl SeparatorParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_run_length == 0 {
            return Err(Error::InvalidParameter("min_run_length must be positive".into()));
        }
        if self.min_width == 0 || self.min_width > self.max_width {
            return Err(Error::InvalidParameter(format!(
                "separator width bounds [{}, {}] invalid",
                self.min_width, self.max_width
            )));
        }
        Ok(())
    }
}

/// A detected vertical whitespace separator strip.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnSeparator {
    /// First and last pixel column of the strip.
    pub v_alpha: u32,
    pub v_beta: u32,
    /// Average start row of the qualifying runs.
    pub s_h: u32,
    /// End row position: s_h + l_v.
    pub e_h: u32,
    /// Average qualifying run length.
    pub l_v: u32,
    /// Shared id when several stacked separators occupy one strip.
    pub overlap_group: Option<u32>,
    /// Per-column index of the qualifying run inside the column's run list.
    #[serde(skip)]
    pub run_indices: Vec<u32>,
}

/// Averaged geometry of one qualifying run across a group's columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeparatorGeometry {
    pub l_v: u32,
    pub s_h: u32,
    pub e_h: u32,
}

/// Rounds `sum / count` to the nearest integer.
fn round_mean(sum: u64, count: u64, ties_up: bool) -> u32 {
    let q = sum / count;
    let r = sum % count;
    let up = match (2 * r).cmp(&count) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Equal => ties_up,
        std::cmp::Ordering::Less => false,
    };
    (q + u64::from(up)) as u32
}

/// Computes the separator length, start row, and end row by averaging the
/// chosen run of each column (`run_index[i]` indexes `columns[i]`).
pub fn separator_params(
    columns: &[ColumnRuns],
    run_index: &[usize],
    v_alpha: u32,
    v_beta: u32,
    ties_up: bool,
) -> Result<SeparatorGeometry> {
    if v_beta < v_alpha {
        return Err(Error::DegenerateGroup);
    }
    let count = (v_beta - v_alpha + 1) as u64;
    if columns.len() as u64 != count || run_index.len() != columns.len() {
        return Err(Error::InvalidParameter(format!(
            "group spans {count} columns but {} run lists / {} indices supplied",
            columns.len(),
            run_index.len()
        )));
    }
    let mut len_sum = 0u64;
    let mut above_sum = 0u64;
    for (runs, &p) in columns.iter().zip(run_index) {
        len_sum += runs[p].length as u64;
        above_sum += runs[..p].iter().map(|r| r.length as u64).sum::<u64>();
    }
    let l_v = round_mean(len_sum, count, ties_up);
    let s_h = round_mean(above_sum, count, ties_up);
    Ok(SeparatorGeometry {
        l_v,
        s_h,
        e_h: s_h + l_v,
    })
}

/// Indices of white runs at least `min_len` long, top to bottom.
fn qualifying_runs(runs: &ColumnRuns, min_len: u32) -> Vec<usize> {
    runs.iter()
        .enumerate()
        .filter(|(_, r)| r.color == 0 && r.length >= min_len)
        .map(|(i, _)| i)
        .collect()
}

/// Picks `k` qualifying runs of one column: the `k` longest (ties to the
/// topmost), reported in top-to-bottom order so that rank aligns across the
/// group's columns.
fn choose_runs(runs: &ColumnRuns, qualifying: &[usize], k: usize) -> Vec<usize> {
    if qualifying.len() == k {
        return qualifying.to_vec();
    }
    let mut by_len: Vec<usize> = qualifying.to_vec();
    by_len.sort_by_key(|&i| (std::cmp::Reverse(runs[i].length), i));
    let mut chosen: Vec<usize> = by_len[..k].to_vec();
    chosen.sort_unstable();
    chosen
}

/// Scans every pixel column of a normalized document and returns the
/// detected separators in left-to-right, top-to-bottom order. An empty
/// result means a single-column document.
pub fn detect_separators(matrix: &RunMatrix, params: &SeparatorParams) -> Vec<ColumnSeparator> {
    let n = matrix.width();
    let mut cursor = ColumnCursor::new(matrix);
    let mut pop = ColumnPop::default();

    let mut separators = Vec::new();
    let mut overlap_ids = 0u32;
    let mut group: Vec<(u32, ColumnRuns)> = Vec::new();

    let flush = |group: &mut Vec<(u32, ColumnRuns)>,
                     separators: &mut Vec<ColumnSeparator>,
                     overlap_ids: &mut u32| {
        if group.is_empty() {
            return;
        }
        let v_alpha = group.first().unwrap().0;
        let v_beta = group.last().unwrap().0;
        let width = v_beta - v_alpha + 1;
        let at_edge = v_alpha == 0 || v_beta == n - 1;
        if width < params.min_width
            || width > params.max_width
            || (params.remove_edges && at_edge)
        {
            group.clear();
            return;
        }
        let per_column: Vec<Vec<usize>> = group
            .iter()
            .map(|(_, runs)| qualifying_runs(runs, params.min_run_length))
            .collect();
        let k = per_column.iter().map(|q| q.len()).min().unwrap_or(0);
        debug_assert!(k >= 1, "every group column qualified");
        let overlap_group = if k >= 2 {
            let id = *overlap_ids;
            *overlap_ids += 1;
            Some(id)
        } else {
            None
        };
        let chosen: Vec<Vec<usize>> = group
            .iter()
            .zip(&per_column)
            .map(|((_, runs), q)| choose_runs(runs, q, k))
            .collect();
        for rank in 0..k {
            let run_index: Vec<usize> = chosen.iter().map(|c| c[rank]).collect();
            let columns: Vec<ColumnRuns> = group.iter().map(|(_, r)| r.clone()).collect();
            let geom = separator_params(&columns, &run_index, v_alpha, v_beta, params.round_ties_up)
                .expect("group geometry is well formed");
            separators.push(ColumnSeparator {
                v_alpha,
                v_beta,
                s_h: geom.s_h,
                e_h: geom.e_h,
                l_v: geom.l_v,
                overlap_group,
                run_indices: run_index.iter().map(|&i| i as u32).collect(),
            });
        }
        group.clear();
    };

    for col in 0..n {
        cursor.pop_into(&mut pop).expect("cursor covers the width");
        let runs = column_runs(&pop.transitions);
        let is_candidate = runs
            .iter()
            .any(|r| r.color == 0 && r.length >= params.min_run_length);
        if is_candidate {
            group.push((col, runs));
        } else {
            flush(&mut group, &mut separators, &mut overlap_ids);
        }
    }
    flush(&mut group, &mut separators, &mut overlap_ids);
    separators
}

/// Absolute vertical midpoint of a separator: s_h plus half its span.
fn midpoint(sep: &ColumnSeparator) -> f64 {
    sep.s_h as f64 + (sep.e_h as f64 - sep.s_h as f64 + 1.0) / 2.0
}

/// Groups separators into horizontal bands and emits the column block
/// rectangles in reading order (bands top to bottom, blocks left to right).
///
/// The first unconsumed separator (topmost start row, then leftmost) is the
/// band reference; every separator whose midpoint falls inside the
/// reference's row span joins the band. Blocks between and beside the
/// band's strips take the reference's vertical extent. Stacked separators
/// of an overlap group are consumed one band at a time, which lets a shared
/// strip serve successive bands. With no separators the whole page is one
/// block.
pub fn order_column_blocks(separators: &[ColumnSeparator], page: Rect) -> Vec<Rect> {
    if separators.is_empty() {
        return vec![page];
    }
    let mut order: Vec<usize> = (0..separators.len()).collect();
    order.sort_by_key(|&i| {
        let s = &separators[i];
        (s.s_h, s.v_alpha, s.e_h)
    });
    let mut consumed = vec![false; separators.len()];
    let mut blocks = Vec::new();

    while let Some(&ref_idx) = order.iter().find(|&&i| !consumed[i]) {
        let reference = &separators[ref_idx];
        let (lo, hi) = (reference.s_h as f64, reference.e_h as f64);
        let mut band: Vec<&ColumnSeparator> = Vec::new();
        for &i in &order {
            if consumed[i] {
                continue;
            }
            let mid = midpoint(&separators[i]);
            if mid >= lo && mid <= hi {
                consumed[i] = true;
                band.push(&separators[i]);
            }
        }
        debug_assert!(!band.is_empty(), "the reference joins its own band");
        band.sort_by_key(|s| s.v_alpha);

        let top = reference.s_h.max(page.top).min(page.bottom);
        let bottom = reference.e_h.saturating_sub(1).min(page.bottom).max(top);
        let mut cursor_col = page.left;
        for sep in &band {
            if sep.v_alpha > cursor_col {
                blocks.push(Rect::new(top, bottom, cursor_col, sep.v_alpha - 1));
            }
            cursor_col = cursor_col.max(sep.v_beta + 1);
        }
        if cursor_col <= page.right {
            blocks.push(Rect::new(top, bottom, cursor_col, page.right));
        }
    }
    blocks
}

/// Detects separators, orders the column blocks, crops each block in
/// compressed form, and re-normalizes every block so that inverted regions
/// stretched across a single column are recovered.
pub fn segment_columns(
    matrix: &RunMatrix,
    params: &SeparatorParams,
    smooth_window: u32,
) -> Result<Vec<(Rect, RunMatrix)>> {
    let separators = detect_separators(matrix, params);
    let page = Rect::new(0, matrix.height() - 1, 0, matrix.width() - 1);
    let rects = order_column_blocks(&separators, page);
    let mut out = Vec::with_capacity(rects.len());
    for rect in rects {
        let crop = matrix.crop(rect)?;
        let (normalized, _) = normalize_document(crop, smooth_window)?;
        out.push((rect, normalized));
    }
    Ok(out)
}
