//! Coarse horizontal segmentation of a column block into text blocks,
//! paragraphs, and text lines.
//!
//! A row is blank when its black run sum is zero. Maximal blank gaps between
//! ink bands are classified by height: at least the block threshold opens a
//! new text block, at least the paragraph lower bound opens a paragraph, and
//! anything smaller is an ordinary line separator. Within a block, a line
//! whose left margin exceeds the block's modal margin by an indent in the
//! configured range also opens a paragraph.

use crate::error::{Error, Result};
use crate::run_matrix::RunMatrix;

/// Gap and indent thresholds, in pixels.
#[derive(Debug, Clone)]
pub struct RowParams {
    /// Gaps >= this open a text block (W_bs).
    pub block_gap: u32,
    /// Paragraph gap range (W_ps); the upper bound collides with `block_gap`
    /// at the default 25 and resolves in favor of the block separator.
    pub paragraph_gap_min: u32,
    pub paragraph_gap_max: u32,
    /// Gaps strictly below this are line separators (W_ls).
    pub line_gap_bound: u32,
    /// Paragraph indent range (I_p), inclusive.
    pub indent_min: u32,
    pub indent_max: u32,
}

impl Default for RowParams {
    fn default() -> Self {
        RowParams {
            block_gap: 25,
            paragraph_gap_min: 10,
            paragraph_gap_max: 25,
            line_gap_bound: 10,
            indent_min: 30,
            indent_max: 100,
        }
    }
}

impl RowParams {
    pub fn validate(&self) -> Result<()> {
        if self.line_gap_bound > self.paragraph_gap_min
            || self.paragraph_gap_min > self.paragraph_gap_max
            || self.paragraph_gap_max > self.block_gap
        {
            return Err(Error::InvalidParameter(format!(
                "row gap thresholds must be ordered: line {} <= paragraph [{}, {}] <= block {}",
                self.line_gap_bound, self.paragraph_gap_min, self.paragraph_gap_max, self.block_gap
            )));
        }
        if self.indent_min == 0 || self.indent_min > self.indent_max {
            return Err(Error::InvalidParameter(format!(
                "indent range [{}, {}] invalid",
                self.indent_min, self.indent_max
            )));
        }
        Ok(())
    }
}

/// Classification of a blank-row gap between two ink bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowGapClass {
    Line,
    Paragraph,
    Block,
}

/// Total classification of a gap height. A gap at the paragraph/block
/// boundary counts as a block separator.
pub fn classify_row_gap(gap: u32, params: &RowParams) -> RowGapClass {
    if gap >= params.block_gap {
        RowGapClass::Block
    } else if gap >= params.paragraph_gap_min {
        RowGapClass::Paragraph
    } else {
        RowGapClass::Line
    }
}

/// Per-row black pixel mass; a row is blank iff its mass is zero.
#[derive(Debug, Clone)]
pub struct RowProfile {
    pub mass: Vec<u32>,
}

impl RowProfile {
    pub fn is_blank(&self, row: u32) -> bool {
        self.mass[row as usize] == 0
    }
}

pub fn horizontal_profile(block: &RunMatrix) -> RowProfile {
    let mass = (0..block.height())
        .map(|r| block.row_pairs(r).iter().map(|p| p.black).sum())
        .collect();
    RowProfile { mass }
}

/// One text line band: inclusive row range within the block plus the left
/// margin (leading white run minimum over the band's rows).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineBand {
    pub top: u32,
    pub bottom: u32,
    pub left_margin: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParagraphBand {
    pub lines: Vec<LineBand>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextBlockBand {
    pub paragraphs: Vec<ParagraphBand>,
}

impl TextBlockBand {
    pub fn lines(&self) -> impl Iterator<Item = &LineBand> {
        self.paragraphs.iter().flat_map(|p| p.lines.iter())
    }
}

/// Splits a column block into text blocks, paragraphs, and line bands.
/// Leading and trailing blank rows are trimmed, not classified. Errors with
/// `EmptyBlock` when no ink row exists.
pub fn segment_rows(block: &RunMatrix, params: &RowParams) -> Result<Vec<TextBlockBand>> {
    params.validate()?;
    let profile = horizontal_profile(block);

    // maximal ink bands
    let mut bands: Vec<LineBand> = Vec::new();
    let mut r = 0u32;
    while r < block.height() {
        if profile.is_blank(r) {
            r += 1;
            continue;
        }
        let top = r;
        while r < block.height() && !profile.is_blank(r) {
            r += 1;
        }
        let bottom = r - 1;
        let left_margin = (top..=bottom)
            .map(|row| block.row_pairs(row)[0].white)
            .min()
            .unwrap();
        bands.push(LineBand {
            top,
            bottom,
            left_margin,
        });
    }
    if bands.is_empty() {
        return Err(Error::EmptyBlock);
    }

    // split bands into text blocks at block-sized gaps
    let mut blocks: Vec<Vec<LineBand>> = vec![vec![bands[0]]];
    for pair in bands.windows(2) {
        let gap = pair[1].top - pair[0].bottom - 1;
        if classify_row_gap(gap, params) == RowGapClass::Block {
            blocks.push(Vec::new());
        }
        blocks.last_mut().unwrap().push(pair[1]);
    }

    let mut out = Vec::with_capacity(blocks.len());
    for lines in blocks {
        let modal = modal_margin(&lines);
        let qualifies_indent = |line: &LineBand| {
            line.left_margin > modal
                && (params.indent_min..=params.indent_max)
                    .contains(&(line.left_margin - modal))
        };
        let mut paragraphs: Vec<ParagraphBand> = vec![ParagraphBand {
            lines: vec![lines[0]],
        }];
        for pair in lines.windows(2) {
            let gap = pair[1].top - pair[0].bottom - 1;
            let breaks = classify_row_gap(gap, params) == RowGapClass::Paragraph
                || qualifies_indent(&pair[1]);
            if breaks {
                paragraphs.push(ParagraphBand { lines: Vec::new() });
            }
            paragraphs.last_mut().unwrap().lines.push(pair[1]);
        }
        out.push(TextBlockBand { paragraphs });
    }
    Ok(out)
}

/// Most frequent line margin; ties resolve to the smaller margin.
fn modal_margin(lines: &[LineBand]) -> u32 {
    let mut counts: std::collections::BTreeMap<u32, u32> = std::collections::BTreeMap::new();
    for line in lines {
        *counts.entry(line.left_margin).or_insert(0) += 1;
    }
    counts
        .iter()
        .max_by_key(|&(margin, count)| (count, std::cmp::Reverse(margin)))
        .map(|(&margin, _)| margin)
        .unwrap()
}
