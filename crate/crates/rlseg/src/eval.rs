//! Text-line accuracy metrics against ground truth.
//!
//! Detected lines are matched one-to-one against ground-truth lines in
//! ground-truth order; a pair matches when both the vertical and horizontal
//! overlaps reach the configured fraction of the ground-truth extent. The
//! inverted-region accuracy divides recovered inverted lines by all inverted
//! lines; the page segmentation accuracy divides correctly found lines by
//! all lines, with spurious detections counted as errors (configurable).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Rect;

/// One ground-truth text line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GtLine {
    #[serde(flatten)]
    pub rect: Rect,
    pub inverted: bool,
}

/// Ground truth for one document.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub lines: Vec<GtLine>,
}

impl GroundTruth {
    /// Inverted-region line count (R_gt).
    pub fn inverted_count(&self) -> u32 {
        self.lines.iter().filter(|l| l.inverted).count() as u32
    }

    /// Total line count (L_gt).
    pub fn line_count(&self) -> u32 {
        self.lines.len() as u32
    }
}

/// Greedy one-to-one matching in ground-truth order. A detected rect matches
/// a ground-truth rect when the vertical overlap reaches `overlap` times the
/// ground-truth height and the horizontal overlap reaches `overlap` times
/// the ground-truth width; among candidates the largest overlap area wins.
/// Returns the matched `(gt_index, detected_index)` pairs and the number of
/// unmatched ground-truth rects.
pub fn match_lines(detected: &[Rect], gt: &[Rect], overlap: f64) -> (Vec<(usize, usize)>, usize) {
    debug_assert!(overlap > 0.0 && overlap <= 1.0);
    let mut used = vec![false; detected.len()];
    let mut pairs = Vec::new();
    for (gi, g) in gt.iter().enumerate() {
        let need_v = overlap * g.height() as f64;
        let need_h = overlap * g.width() as f64;
        let mut best: Option<(usize, u64)> = None;
        for (di, d) in detected.iter().enumerate() {
            if used[di] {
                continue;
            }
            let ov = g.vertical_overlap(d) as f64;
            let oh = g.horizontal_overlap(d) as f64;
            if ov >= need_v && oh >= need_h {
                let area = ov as u64 * oh as u64;
                if best.is_none_or(|(_, a)| area > a) {
                    best = Some((di, area));
                }
            }
        }
        if let Some((di, _)) = best {
            used[di] = true;
            pairs.push((gi, di));
        }
    }
    let unmatched = gt.len() - pairs.len();
    (pairs, unmatched)
}

/// Accuracy report. `a_rl` and `a_ps` are fractions in [0, 1]; `a_rl` is
/// absent when the ground truth has no inverted lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub r_gt: u32,
    pub r_er: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_rl: Option<f64>,
    pub l_gt: u32,
    pub l_er: u32,
    pub a_ps: f64,
}

impl EvalReport {
    /// Builds a report from raw counts. `l_er` is clipped to `l_gt` for
    /// reporting so that accuracies stay in [0, 1].
    pub fn from_counts(r_gt: u32, r_er: u32, l_gt: u32, l_er: u32) -> Result<EvalReport> {
        if l_gt == 0 {
            return Err(Error::EmptyGroundTruth);
        }
        let r_er = r_er.min(r_gt);
        let l_er = l_er.min(l_gt);
        let a_rl = (r_gt > 0).then(|| (r_gt - r_er) as f64 / r_gt as f64);
        let a_ps = (l_gt - l_er) as f64 / l_gt as f64;
        Ok(EvalReport {
            r_gt,
            r_er,
            a_rl,
            l_gt,
            l_er,
            a_ps,
        })
    }
}

/// Matches detected lines against ground truth and computes both accuracies.
/// `count_spurious` adds unmatched detections to the page-level error count
/// (the stricter reading of "wrongly detected").
pub fn accuracy(
    gt: &GroundTruth,
    detected: &[Rect],
    overlap: f64,
    count_spurious: bool,
) -> Result<EvalReport> {
    if gt.lines.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    if !(overlap > 0.0 && overlap <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "overlap fraction {overlap} outside (0, 1]"
        )));
    }
    let gt_rects: Vec<Rect> = gt.lines.iter().map(|l| l.rect).collect();
    let (pairs, unmatched) = match_lines(detected, &gt_rects, overlap);
    let matched_gt: std::collections::HashSet<usize> = pairs.iter().map(|&(g, _)| g).collect();
    let r_er = gt
        .lines
        .iter()
        .enumerate()
        .filter(|(i, l)| l.inverted && !matched_gt.contains(i))
        .count() as u32;
    let spurious = detected.len() - pairs.len();
    let l_er = unmatched as u32 + if count_spurious { spurious as u32 } else { 0 };
    EvalReport::from_counts(gt.inverted_count(), r_er, gt.line_count(), l_er)
}
