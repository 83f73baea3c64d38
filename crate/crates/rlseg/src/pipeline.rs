//! Pipeline configuration and compressed-domain orchestration.
//!
//! Stage order: optional despeckle, page-level inverted-region
//! normalization, separator detection and ordering, per-block compressed
//! crop with block-level re-normalization, then row and fine segmentation.
//! Blocks are processed one at a time and dropped as soon as their subtree
//! is built; the decoded bitmap is never constructed on this path.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::columns::{detect_separators, order_column_blocks, SeparatorParams};
use crate::error::{Error, Result};
use crate::fine::{segment_line, FineParams};
use crate::geom::Rect;
use crate::inverted::{normalize_cow, normalize_document};
use crate::rows::{segment_rows, RowParams};
use crate::run_matrix::RunMatrix;
use crate::tree::{NodeKind, SegmentNode, SegmentTree};

/// Vertical separator length threshold: either relative to the page height
/// (one sixth of the row count) or a fixed pixel count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparatorLength {
    PageFraction,
    Pixels(u32),
}

impl SeparatorLength {
    /// Resolves the threshold for a page of `height` rows.
    pub fn resolve(&self, height: u32) -> u32 {
        match self {
            SeparatorLength::PageFraction => (height / 6).max(1),
            SeparatorLength::Pixels(px) => *px,
        }
    }
}

impl Serialize for SeparatorLength {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SeparatorLength::PageFraction => s.serialize_str("m/6"),
            SeparatorLength::Pixels(px) => s.serialize_u32(*px),
        }
    }
}

impl<'de> Deserialize<'de> for SeparatorLength {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(u32),
        }
        match Raw::deserialize(d)? {
            Raw::Number(px) => Ok(SeparatorLength::Pixels(px)),
            Raw::Text(s) if s == "m/6" => Ok(SeparatorLength::PageFraction),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "l_cs_v must be a pixel count or the string \"m/6\", got {s:?}"
            ))),
        }
    }
}

/// All pipeline thresholds. The defaults are the experimentally learnt
/// values; a config file only needs the keys it overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Vertical column separator length threshold (L_cs^v).
    pub l_cs_v: SeparatorLength,
    /// Vertical column separator width bounds (W_cs^v).
    pub w_cs_v_min: u32,
    pub w_cs_v_max: u32,
    /// Discard separators touching the page edges.
    pub remove_edge_separators: bool,
    /// Round .5 separator averages up.
    pub round_ties_up: bool,
    /// Horizontal text block separator (W_bs).
    pub w_bs: u32,
    /// Horizontal paragraph separator range (W_ps).
    pub w_ps_min: u32,
    pub w_ps_max: u32,
    /// Horizontal text line separator bound (W_ls, exclusive).
    pub w_ls: u32,
    /// Paragraph indent range (I_p).
    pub i_p_min: u32,
    pub i_p_max: u32,
    /// Word separator width threshold (W_ws).
    pub w_ws: u32,
    /// Character separator width bound (W_cs, exclusive).
    pub w_cs: u32,
    /// Majority filter width for inverted-region detection, odd.
    pub smooth_window: u32,
    /// Black runs shorter than this are dropped before segmentation;
    /// 0 disables despeckling.
    pub despeckle_min_black: u32,
    /// Overlap fraction for line matching in evaluation.
    pub overlap_fraction: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            l_cs_v: SeparatorLength::PageFraction,
            w_cs_v_min: 70,
            w_cs_v_max: 120,
            remove_edge_separators: true,
            round_ties_up: true,
            w_bs: 25,
            w_ps_min: 10,
            w_ps_max: 25,
            w_ls: 10,
            i_p_min: 30,
            i_p_max: 100,
            w_ws: 5,
            w_cs: 5,
            smooth_window: 9,
            despeckle_min_black: 0,
            overlap_fraction: 0.5,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.row_params().validate()?;
        self.fine_params().validate()?;
        if self.w_cs_v_min == 0 || self.w_cs_v_min > self.w_cs_v_max {
            return Err(Error::InvalidParameter(format!(
                "separator width bounds [{}, {}] invalid",
                self.w_cs_v_min, self.w_cs_v_max
            )));
        }
        if self.smooth_window == 0 || self.smooth_window.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "smooth_window must be odd, got {}",
                self.smooth_window
            )));
        }
        if let SeparatorLength::Pixels(0) = self.l_cs_v {
            return Err(Error::InvalidParameter("l_cs_v must be positive".into()));
        }
        if !(self.overlap_fraction > 0.0 && self.overlap_fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "overlap_fraction {} outside (0, 1]",
                self.overlap_fraction
            )));
        }
        Ok(())
    }

    pub fn separator_params(&self, page_height: u32) -> SeparatorParams {
        SeparatorParams {
            min_run_length: self.l_cs_v.resolve(page_height),
            min_width: self.w_cs_v_min,
            max_width: self.w_cs_v_max,
            remove_edges: self.remove_edge_separators,
            round_ties_up: self.round_ties_up,
        }
    }

    pub fn row_params(&self) -> RowParams {
        RowParams {
            block_gap: self.w_bs,
            paragraph_gap_min: self.w_ps_min,
            paragraph_gap_max: self.w_ps_max,
            line_gap_bound: self.w_ls,
            indent_min: self.i_p_min,
            indent_max: self.i_p_max,
        }
    }

    pub fn fine_params(&self) -> FineParams {
        FineParams {
            word_gap: self.w_ws,
            char_gap_bound: self.w_cs,
        }
    }
}

/// Runs the full compressed-domain segmentation. A whitespace-only page
/// yields a tree with zero column blocks.
pub fn run_pipeline(matrix: &RunMatrix, config: &PipelineConfig) -> Result<SegmentTree> {
    config.validate()?;
    let page = Rect::new(0, matrix.height() - 1, 0, matrix.width() - 1);

    let despeckled: Cow<RunMatrix> = if config.despeckle_min_black > 0 {
        Cow::Owned(matrix.despeckle(config.despeckle_min_black))
    } else {
        Cow::Borrowed(matrix)
    };
    let (normalized, _page_regions) = normalize_cow(despeckled, config.smooth_window)?;

    let sep_params = config.separator_params(matrix.height());
    let separators = detect_separators(&normalized, &sep_params);
    let block_rects = order_column_blocks(&separators, page);

    let mut root = SegmentNode::new(NodeKind::Page, page);
    for rect in block_rects {
        let crop = normalized.crop(rect)?;
        let (block_matrix, _) = normalize_document(crop, config.smooth_window)?;
        match segment_block(&block_matrix, rect, config)? {
            Some(column) => root.children.push(column),
            None => continue, // whitespace-only block
        }
    }
    Ok(SegmentTree::new(root))
}

/// Segments one normalized column block into its subtree, translating every
/// rect into page coordinates. Returns `None` for a whitespace-only block.
fn segment_block(
    block: &RunMatrix,
    rect: Rect,
    config: &PipelineConfig,
) -> Result<Option<SegmentNode>> {
    let band_blocks = match segment_rows(block, &config.row_params()) {
        Ok(b) => b,
        Err(Error::EmptyBlock) => return Ok(None),
        Err(e) => return Err(e),
    };
    let fine = config.fine_params();
    let mut column = SegmentNode::new(NodeKind::Column, rect);
    for band_block in &band_blocks {
        let mut block_node: Option<SegmentNode> = None;
        for paragraph in &band_block.paragraphs {
            let mut para_node: Option<SegmentNode> = None;
            for line in paragraph.lines.iter() {
                let line_crop = block.crop(Rect::new(line.top, line.bottom, 0, block.width() - 1))?;
                let words = segment_line(&line_crop, &fine)?;
                let first = words.first().expect("ink bands exist").rect.left;
                let last = words.last().unwrap().rect.right;
                let line_rect = Rect::new(line.top, line.bottom, first, last)
                    .translated(rect.top, rect.left);
                let mut line_node = SegmentNode::new(NodeKind::Line, line_rect);
                for word in words {
                    let mut word_node = SegmentNode::new(
                        NodeKind::Word,
                        word.rect
                            .translated(line.top, 0)
                            .translated(rect.top, rect.left),
                    );
                    for ch in word.characters {
                        word_node.children.push(SegmentNode::new(
                            NodeKind::Character,
                            ch.translated(line.top, 0).translated(rect.top, rect.left),
                        ));
                    }
                    line_node.children.push(word_node);
                }
                attach(&mut para_node, NodeKind::Paragraph, line_node);
            }
            if let Some(p) = para_node {
                attach(&mut block_node, NodeKind::Block, p);
            }
        }
        if let Some(b) = block_node {
            column.children.push(b);
        }
    }
    Ok(Some(column))
}

/// Pushes `child` into `slot`, growing the slot's bounding rect.
fn attach(slot: &mut Option<SegmentNode>, kind: NodeKind, child: SegmentNode) {
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
