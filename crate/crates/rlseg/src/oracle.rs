//! Decompress-then-segment reference path.
//!
//! Implements the identical stage logic as `pipeline::run_pipeline` with
//! direct pixel operations: pixel-row counting for inverted-region
//! detection, pixel-column scans for separator candidates, pixel complement
//! for toggling, and pixel profiles for the row and fine splits. It shares
//! the configuration and output types with the compressed path but none of
//! its run arithmetic, which makes it both the equivalence oracle and the
//! conventional baseline for time/space comparison.

use crate::bitmap::{Bitmap, BLACK, WHITE};
use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::pipeline::PipelineConfig;
use crate::tree::{NodeKind, SegmentNode, SegmentTree};

/// Runs the pixel-domain pipeline over a decoded bitmap.
pub fn reference_oracle(bitmap: &Bitmap, config: &PipelineConfig) -> Result<SegmentTree> {
    config.validate()?;
    let mut work = bitmap.clone();
    if config.despeckle_min_black > 0 {
        despeckle_pixels(&mut work, config.despeckle_min_black);
    }
    normalize_pixels(&mut work, config.smooth_window);

    let page = Rect::new(0, work.height() - 1, 0, work.width() - 1);
    let separators = detect_separators_pixels(&work, config);
    let block_rects = order_blocks_pixels(&separators, page);

    let mut root = SegmentNode::new(NodeKind::Page, page);
    for rect in block_rects {
        let mut crop = work.crop(rect)?;
        normalize_pixels(&mut crop, config.smooth_window);
        if let Some(column) = segment_block_pixels(&crop, rect, config)? {
            root.children.push(column);
        }
    }
    Ok(SegmentTree::new(root))
}

/// Whitens black pixel runs shorter than `min_black`, row by row.
pub fn despeckle_pixels(bitmap: &mut Bitmap, min_black: u32) {
    for r in 0..bitmap.height() {
        let row = bitmap.row_mut(r);
        let mut c = 0usize;
        while c < row.len() {
            if row[c] == BLACK {
                let start = c;
                while c < row.len() && row[c] == BLACK {
                    c += 1;
                }
                if ((c - start) as u32) < min_black {
                    row[start..c].fill(WHITE);
                }
            } else {
                c += 1;
            }
        }
    }
}

/// Detects inverted row ranges by counting pixels per row, smoothing with
/// the majority filter, and complementing the rows where the raw and
/// smoothed indicators agree, repeated until none remain.
fn normalize_pixels(bitmap: &mut Bitmap, smooth_window: u32) {
    let half = (smooth_window / 2) as isize;
    let majority = smooth_window / 2 + 1;
    let rows = bitmap.height() as usize;
    let full_width = Rect::new(0, bitmap.height() - 1, 0, bitmap.width() - 1);
    loop {
        let raw: Vec<u8> = (0..bitmap.height())
            .map(|r| {
                let black = bitmap.row(r).iter().filter(|&&p| p == BLACK).count();
                u8::from(2 * black > bitmap.width() as usize)
            })
            .collect();
        let mut any = false;
        for i in 0..rows {
            let lo = (i as isize - half).max(0) as usize;
            let hi = (i + half as usize).min(rows - 1);
            let ones: u32 = raw[lo..=hi].iter().map(|&d| u32::from(d)).sum();
            if raw[i] == 1 && ones >= majority {
                bitmap.complement(Rect::new(i as u32, i as u32, full_width.left, full_width.right));
                any = true;
            }
        }
        if !any {
            break;
        }
    }
}

#[derive(Debug, Clone)]
struct PixelSeparator {
    v_alpha: u32,
    v_beta: u32,
    s_h: u32,
    e_h: u32,
}

/// White vertical runs of one pixel column as (start row, length).
fn column_white_runs(bitmap: &Bitmap, col: u32) -> Vec<(u32, u32)> {
    let mut runs = Vec::new();
    let mut start: Option<u32> = None;
    for r in 0..bitmap.height() {
        if bitmap.get(r, col) == WHITE {
            if start.is_none() {
                start = Some(r);
            }
        } else if let Some(s) = start.take() {
            runs.push((s, r - s));
        }
    }
    if let Some(s) = start {
        runs.push((s, bitmap.height() - s));
    }
    runs
}

fn round_mean_px(sum: u64, count: u64, ties_up: bool) -> u32 {
    let q = sum / count;
    let r = sum % count;
    let up = match (2 * r).cmp(&count) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Equal => ties_up,
        std::cmp::Ordering::Less => false,
    };
    (q + u64::from(up)) as u32
}

fn detect_separators_pixels(bitmap: &Bitmap, config: &PipelineConfig) -> Vec<PixelSeparator> {
    let min_run = config.l_cs_v.resolve(bitmap.height());
    let n = bitmap.width();
    let mut separators = Vec::new();
    let mut group: Vec<(u32, Vec<(u32, u32)>)> = Vec::new();

    let flush = |group: &mut Vec<(u32, Vec<(u32, u32)>)>, separators: &mut Vec<PixelSeparator>| {
        if group.is_empty() {
            return;
        }
        let v_alpha = group.first().unwrap().0;
        let v_beta = group.last().unwrap().0;
        let width = v_beta - v_alpha + 1;
        let at_edge = v_alpha == 0 || v_beta == n - 1;
        if width < config.w_cs_v_min
            || width > config.w_cs_v_max
            || (config.remove_edge_separators && at_edge)
        {
            group.clear();
            return;
        }
        let k = group.iter().map(|(_, q)| q.len()).min().unwrap_or(0);
        // per column keep the k longest qualifying runs, then rank them top
        // to bottom so rank i aligns across the group
        let chosen: Vec<Vec<(u32, u32)>> = group
            .iter()
            .map(|(_, q)| {
                let mut by_len = q.clone();
                by_len.sort_by_key(|&(start, len)| (std::cmp::Reverse(len), start));
                let mut top: Vec<(u32, u32)> = by_len[..k].to_vec();
                top.sort_unstable();
                top
            })
            .collect();
        let count = width as u64;
        for rank in 0..k {
            let len_sum: u64 = chosen.iter().map(|c| c[rank].1 as u64).sum();
            let above_sum: u64 = chosen.iter().map(|c| c[rank].0 as u64).sum();
            let l_v = round_mean_px(len_sum, count, config.round_ties_up);
            let s_h = round_mean_px(above_sum, count, config.round_ties_up);
            separators.push(PixelSeparator {
                v_alpha,
                v_beta,
                s_h,
                e_h: s_h + l_v,
            });
        }
        group.clear();
    };

    for col in 0..n {
        let qualifying: Vec<(u32, u32)> = column_white_runs(bitmap, col)
            .into_iter()
            .filter(|&(_, len)| len >= min_run)
            .collect();
        if !qualifying.is_empty() {
            group.push((col, qualifying));
        } else {
            flush(&mut group, &mut separators);
        }
    }
    flush(&mut group, &mut separators);
    separators
}

fn order_blocks_pixels(separators: &[PixelSeparator], page: Rect) -> Vec<Rect> {
    if separators.is_empty() {
        return vec![page];
    }
    let mut order: Vec<usize> = (0..separators.len()).collect();
    order.sort_by_key(|&i| (separators[i].s_h, separators[i].v_alpha, separators[i].e_h));
    let mut consumed = vec![false; separators.len()];
    let mut blocks = Vec::new();
    while let Some(&ref_idx) = order.iter().find(|&&i| !consumed[i]) {
        let reference = &separators[ref_idx];
        let (lo, hi) = (reference.s_h as f64, reference.e_h as f64);
        let mut band: Vec<&PixelSeparator> = Vec::new();
        for &i in &order {
            if consumed[i] {
                continue;
            }
            let s = &separators[i];
            let mid = s.s_h as f64 + (s.e_h as f64 - s.s_h as f64 + 1.0) / 2.0;
            if mid >= lo && mid <= hi {
                consumed[i] = true;
                band.push(s);
            }
        }
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

/// Segments one normalized block crop (local coordinates); `rect` locates
/// the crop on the page for translation. Returns `None` when whitespace only.
fn segment_block_pixels(
    crop: &Bitmap,
    rect: Rect,
    config: &PipelineConfig,
) -> Result<Option<SegmentNode>> {
    let row_has_ink = |r: u32| crop.row(r).contains(&BLACK);
    let mut bands: Vec<(u32, u32, u32)> = Vec::new(); // top, bottom, left margin
    let mut r = 0u32;
    while r < crop.height() {
        if !row_has_ink(r) {
            r += 1;
            continue;
        }
        let top = r;
        while r < crop.height() && row_has_ink(r) {
            r += 1;
        }
        let bottom = r - 1;
        let margin = (top..=bottom)
            .map(|row| {
                crop.row(row)
                    .iter()
                    .position(|&p| p == BLACK)
                    .unwrap_or(crop.width() as usize) as u32
            })
            .min()
            .unwrap();
        bands.push((top, bottom, margin));
    }
    if bands.is_empty() {
        return Ok(None);
    }

    // blocks at block-sized gaps
    let mut blocks: Vec<Vec<(u32, u32, u32)>> = vec![vec![bands[0]]];
    for pair in bands.windows(2) {
        let gap = pair[1].0 - pair[0].1 - 1;
        if gap >= config.w_bs {
            blocks.push(Vec::new());
        }
        blocks.last_mut().unwrap().push(pair[1]);
    }

    let mut column = SegmentNode::new(NodeKind::Column, rect);
    for lines in blocks {
        let modal = {
            let mut counts: std::collections::BTreeMap<u32, u32> = Default::default();
            for &(_, _, m) in &lines {
                *counts.entry(m).or_insert(0) += 1;
            }
            counts
                .iter()
                .max_by_key(|&(margin, count)| (count, std::cmp::Reverse(margin)))
                .map(|(&m, _)| m)
                .unwrap()
        };
        let mut block_node: Option<SegmentNode> = None;
        let mut para_node: Option<SegmentNode> = None;
        for (i, &(top, bottom, margin)) in lines.iter().enumerate() {
            let breaks = if i == 0 {
                false
            } else {
                let gap = top - lines[i - 1].1 - 1;
                let indent = margin > modal
                    && (config.i_p_min..=config.i_p_max).contains(&(margin - modal));
                gap >= config.w_ps_min || indent
            };
            if breaks {
                if let Some(p) = para_node.take() {
                    attach_px(&mut block_node, NodeKind::Block, p);
                }
            }
            let line_node = segment_line_pixels(crop, rect, top, bottom, config)?;
            attach_px(&mut para_node, NodeKind::Paragraph, line_node);
        }
        if let Some(p) = para_node.take() {
            attach_px(&mut block_node, NodeKind::Block, p);
        }
        if let Some(b) = block_node {
            column.children.push(b);
        }
    }
    Ok(Some(column))
}

fn segment_line_pixels(
    crop: &Bitmap,
    rect: Rect,
    top: u32,
    bottom: u32,
    config: &PipelineConfig,
) -> Result<SegmentNode> {
    let col_has_ink = |c: u32| (top..=bottom).any(|r| crop.get(r, c) == BLACK);
    let mut bands: Vec<(u32, u32)> = Vec::new();
    let mut start: Option<u32> = None;
    for c in 0..crop.width() {
        if col_has_ink(c) {
            if start.is_none() {
                start = Some(c);
            }
        } else if let Some(s) = start.take() {
            bands.push((s, c - 1));
        }
    }
    if let Some(s) = start {
        bands.push((s, crop.width() - 1));
    }
    if bands.is_empty() {
        return Err(Error::EmptyLine);
    }
    let mut words: Vec<Vec<(u32, u32)>> = vec![vec![bands[0]]];
    for pair in bands.windows(2) {
        let gap = pair[1].0 - pair[0].1 - 1;
        if gap >= config.w_ws {
            words.push(Vec::new());
        }
        words.last_mut().unwrap().push(pair[1]);
    }
    let translate = |top: u32, bottom: u32, l: u32, r: u32| {
        Rect::new(top, bottom, l, r).translated(rect.top, rect.left)
    };
    let line_rect = translate(top, bottom, bands.first().unwrap().0, bands.last().unwrap().1);
    let mut line_node = SegmentNode::new(NodeKind::Line, line_rect);
    for chars in words {
        let word_rect = translate(top, bottom, chars.first().unwrap().0, chars.last().unwrap().1);
        let mut word_node = SegmentNode::new(NodeKind::Word, word_rect);
        for (l, r) in chars {
            word_node
                .children
                .push(SegmentNode::new(NodeKind::Character, translate(top, bottom, l, r)));
        }
        line_node.children.push(word_node);
    }
    Ok(line_node)
}

fn attach_px(slot: &mut Option<SegmentNode>, kind: NodeKind, child: SegmentNode) {
    match slot {
        Some(node) => {
            node.rect = node.rect.union(&child.rect);
            node.children.push(child);
        }
        None => {
            let mut node = SegmentNode::new(kind, child.rect);
            node.children.push(child);
            *slot = Some(node);
        }
    }
}
