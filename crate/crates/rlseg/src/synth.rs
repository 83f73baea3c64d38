//! Deterministic synthetic document generator with exact ground truth.
//!
//! Pages are built from filled rectangles: stacked bands of one or more
//! text columns, each column filled with text blocks, paragraphs, and
//! justified lines of rectangle glyphs. The generator returns the rendered
//! bitmap, the ground-truth line list, and the segment tree the default
//! pipeline thresholds are expected to produce. Layouts whose geometry is
//! ambiguous under those thresholds (gap values on decision boundaries,
//! accidental separator candidates, inverted bands without a clear
//! histogram majority) are rejected with `InfeasibleSpec`; callers retry
//! with another seed.
//!
//! Expected column rectangles are derived by measuring the gutter strips on
//! the clean rendering (pixel runs per strip column) and applying the
//! separator averaging and band-ordering rules to those measurements; all
//! content geometry below the column level comes straight from
//! construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitmap::{Bitmap, BLACK, WHITE};
use crate::error::{Error, Result};
use crate::eval::{GroundTruth, GtLine};
use crate::geom::Rect;
use crate::pipeline::PipelineConfig;
use crate::tree::{NodeKind, SegmentNode, SegmentTree};

/// One stacked band of text columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandSpec {
    pub columns: u32,
    /// Band content height in pixels.
    pub height: u32,
}

/// Placement of one inverted (white-on-black) region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvertedBandSpec {
    /// Index into `bands`.
    pub band: u32,
    /// Column within the band; `None` inverts the full page width (the row
    /// range then follows column 0's lines).
    pub column: Option<u32>,
    /// First line ordinal within that column.
    pub start_line: u32,
    pub line_count: u32,
    /// Blank rows absorbed above and below the lines, at most the line gap.
    pub pad: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutSpec {
    pub page_width: u32,
    pub page_height: u32,
    pub margin: u32,
    pub gutter_width: u32,
    /// Stacked top to bottom, separated by `band_gap`.
    pub bands: Vec<BandSpec>,
    pub band_gap: u32,
    pub glyph_width: u32,
    pub glyph_height: u32,
    pub char_gap: u32,
    pub word_gap: u32,
    pub line_gap: u32,
    pub paragraph_gap: u32,
    pub block_gap: u32,
    /// Paragraph indent in pixels; 0 disables indent-marked paragraphs.
    pub indent: u32,
    pub chars_per_word: [u32; 2],
    pub lines_per_paragraph: [u32; 2],
    pub paragraphs_per_block: [u32; 2],
    /// Draw a thin full-content-width rule inside every band gap. Stacked
    /// layouts require this: the rules pin every strip run to an exact row,
    /// which keeps the averaged block extents from capturing a neighboring
    /// band's lines. The rules are decorations, not ground-truth lines, and
    /// are thin enough for the majority filter to ignore their black-heavy
    /// rows.
    pub separator_rules: bool,
    pub inverted_bands: Vec<InvertedBandSpec>,
    /// Salt-and-pepper specks (black, at most 2x2) dropped on background;
    /// run the pipeline with despeckling enabled on such documents.
    pub speckle_count: u32,
    pub seed: u64,
}

impl Default for LayoutSpec {
    fn default() -> Self {
        LayoutSpec {
            page_width: 640,
            page_height: 900,
            margin: 40,
            gutter_width: 80,
            bands: vec![BandSpec {
                columns: 1,
                height: 820,
            }],
            band_gap: 30,
            glyph_width: 7,
            glyph_height: 22,
            char_gap: 3,
            word_gap: 12,
            line_gap: 6,
            paragraph_gap: 14,
            block_gap: 30,
            indent: 40,
            chars_per_word: [2, 5],
            lines_per_paragraph: [2, 4],
            paragraphs_per_block: [1, 3],
            separator_rules: false,
            inverted_bands: Vec::new(),
            speckle_count: 0,
            seed: 1,
        }
    }
}

/// Random spread added to glyph widths and word gaps so that character
/// boxes do not fall onto a fixed pitch (a rigid lattice lines gaps up
/// vertically and forges long accidental white runs).
const GLYPH_JITTER: u32 = 3;
const WORD_GAP_JITTER: u32 = 5;
/// Band-gap rule thickness; must stay below the majority of the smoothing
/// window so the rule's black-heavy rows never classify as inverted.
const RULE_HEIGHT: u32 = 3;

/// Vertical shape of one rendered glyph box. The first character of a line
/// is full height and anchors the band; the rest alternate strictly between
/// top-half and bottom-half boxes (ascender/descender flavored). Every
/// pixel row then carries close to half of the line's ink columns, keeping
/// the row histograms white dominant, while nearly three quarters of the
/// columns inside a line hold ink somewhere, which starves accidental
/// vertical white runs.
fn glyph_rows(top: u32, height: u32, first: bool, parity: bool) -> (u32, u32) {
    let mid = height / 2;
    if first {
        (top, top + height - 1)
    } else if parity {
        (top, top + mid - 1)
    } else {
        (top + mid, top + height - 1)
    }
}

#[derive(Debug, Clone)]
struct WordRec {
    rect: Rect,
    /// Character rects spanning the full line height (the segmentation
    /// output geometry).
    chars: Vec<Rect>,
    /// Rendered glyph boxes; vertical extents vary per character.
    boxes: Vec<Rect>,
}

#[derive(Debug, Clone)]
struct LineRec {
    band: usize,
    col: usize,
    block: usize,
    para: usize,
    rect: Rect,
    words: Vec<WordRec>,
}

struct Layout {
    lines: Vec<LineRec>,
    /// Band-gap rules (rendered, never part of the ground truth).
    rules: Vec<Rect>,
    /// Gutter strips as inclusive column extents, deduplicated.
    intended_strips: Vec<(u32, u32)>,
}

pub fn generate(spec: &LayoutSpec) -> Result<(Bitmap, GroundTruth, SegmentTree)> {
    let cfg = PipelineConfig::default();
    validate_spec(spec, &cfg)?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let layout = place_content(spec, &mut rng)?;

    let mut bitmap = Bitmap::new(spec.page_height, spec.page_width)?;
    for line in &layout.lines {
        for word in &line.words {
            for glyph_box in &word.boxes {
                bitmap.fill(*glyph_box, BLACK);
            }
        }
    }
    for rule in &layout.rules {
        bitmap.fill(*rule, BLACK);
    }
    let clean = bitmap.clone();

    let block_rects = measure_block_rects(&clean, &layout, &cfg)?;
    let extents = resolve_inverted_extents(spec, &layout, &block_rects)?;
    for extent in &extents {
        bitmap.complement(extent.rect);
    }
    validate_histograms(spec, &clean, &block_rects, &extents)?;
    if spec.speckle_count > 0 {
        place_speckles(spec, &mut bitmap, &mut rng);
    }

    let tree = assemble_tree(spec, &layout, &block_rects)?;
    let ground_truth = ground_truth_from(&tree, &extents);
    Ok((bitmap, ground_truth, tree))
}

fn infeasible(msg: impl Into<String>) -> Error {
    Error::InfeasibleSpec(msg.into())
}

fn validate_spec(spec: &LayoutSpec, cfg: &PipelineConfig) -> Result<()> {
    use crate::fine::{classify_column_gap, ColumnGapClass};
    use crate::rows::{classify_row_gap, RowGapClass};

    if spec.bands.is_empty() {
        return Err(infeasible("at least one band required"));
    }
    if spec.page_width == 0 || spec.page_height == 0 {
        return Err(infeasible("zero page dimension"));
    }
    let bands_height: u32 = spec.bands.iter().map(|b| b.height).sum::<u32>()
        + spec.band_gap * (spec.bands.len() as u32 - 1);
    if 2 * spec.margin + bands_height > spec.page_height {
        return Err(infeasible("bands do not fit the page height"));
    }
    let row_params = cfg.row_params();
    let fine_params = cfg.fine_params();
    if spec.line_gap == 0 || classify_row_gap(spec.line_gap, &row_params) != RowGapClass::Line {
        return Err(infeasible("line_gap must classify as a line separator"));
    }
    if classify_row_gap(spec.paragraph_gap, &row_params) != RowGapClass::Paragraph {
        return Err(infeasible("paragraph_gap must classify as a paragraph separator"));
    }
    if classify_row_gap(spec.block_gap, &row_params) != RowGapClass::Block
        || classify_row_gap(spec.band_gap, &row_params) != RowGapClass::Block
    {
        return Err(infeasible("block_gap and band_gap must classify as block separators"));
    }
    if spec.char_gap == 0
        || classify_column_gap(spec.char_gap, &fine_params) != ColumnGapClass::Character
    {
        return Err(infeasible("char_gap must classify as a character separator"));
    }
    if classify_column_gap(spec.word_gap, &fine_params) != ColumnGapClass::Word {
        return Err(infeasible("word_gap must classify as a word separator"));
    }
    if spec.indent > 0 && !(cfg.i_p_min..=cfg.i_p_max).contains(&spec.indent) {
        return Err(infeasible("indent outside the detectable range"));
    }
    if spec.margin >= cfg.w_cs_v_min {
        return Err(infeasible("margin must stay below the separator width minimum"));
    }
    if spec.bands.iter().any(|b| b.columns == 0) {
        return Err(infeasible("bands need at least one column"));
    }
    if spec.bands.iter().any(|b| b.columns > 1)
        && !(cfg.w_cs_v_min..=cfg.w_cs_v_max).contains(&spec.gutter_width)
    {
        return Err(infeasible("gutter width outside the separator width bounds"));
    }
    if spec.glyph_width == 0 || spec.glyph_height < 2 {
        return Err(infeasible("glyphs must be at least 1x2"));
    }
    if spec.chars_per_word[0] == 0
        || spec.chars_per_word[0] > spec.chars_per_word[1]
        || spec.lines_per_paragraph[0] == 0
        || spec.lines_per_paragraph[0] > spec.lines_per_paragraph[1]
        || spec.paragraphs_per_block[0] == 0
        || spec.paragraphs_per_block[0] > spec.paragraphs_per_block[1]
    {
        return Err(infeasible("count ranges must be non-empty"));
    }
    if spec.speckle_count > 0 && !spec.inverted_bands.is_empty() {
        return Err(infeasible(
            "speckles with inverted bands are unsupported: despeckling would erase \
             the inverted text's character gaps",
        ));
    }
    if spec.speckle_count > 0 && spec.glyph_width < 4 {
        return Err(infeasible("speckled documents need glyphs wider than the despeckle cut"));
    }
    if spec.bands.len() > 1 && !spec.separator_rules {
        return Err(infeasible(
            "stacked bands need separator_rules to pin the strip extents",
        ));
    }
    if spec.separator_rules && 2 * RULE_HEIGHT >= cfg.smooth_window {
        return Err(infeasible("rules too thick for the smoothing window to ignore"));
    }
    if spec.separator_rules {
        let offset = (spec.band_gap - RULE_HEIGHT) / 2;
        if spec.margin < offset + RULE_HEIGHT + 1 {
            return Err(infeasible("margin too small to hold the outer rules"));
        }
    }

    // every column must fit an indented line of two words
    let content = spec
        .page_width
        .checked_sub(2 * spec.margin)
        .ok_or_else(|| infeasible("margins exceed the page width"))?;
    for band in &spec.bands {
        let gutters = spec.gutter_width * (band.columns - 1);
        let width = content
            .checked_sub(gutters)
            .ok_or_else(|| infeasible("gutters exceed the content width"))?
            / band.columns;
        let glyph_max = spec.glyph_width + GLYPH_JITTER;
        let min_width = spec.indent
            + 2 * (glyph_max + spec.char_gap) * spec.chars_per_word[1]
            + spec.word_gap
            + WORD_GAP_JITTER
            + 2 * glyph_max;
        if width < min_width {
            return Err(infeasible("columns too narrow for the glyph metrics"));
        }
        if band.height < spec.glyph_height {
            return Err(infeasible("band shorter than one line"));
        }
    }
    Ok(())
}

/// Column content extents of one band: inclusive (left, right) per column.
fn column_extents(spec: &LayoutSpec, band: &BandSpec) -> Vec<(u32, u32)> {
    let content_left = spec.margin;
    let content_right = spec.page_width - spec.margin - 1;
    let content = content_right - content_left + 1;
    let gutters = spec.gutter_width * (band.columns - 1);
    let width = (content - gutters) / band.columns;
    (0..band.columns)
        .map(|i| {
            let left = content_left + i * (width + spec.gutter_width);
            let right = if i == band.columns - 1 {
                content_right
            } else {
                left + width - 1
            };
            (left, right)
        })
        .collect()
}

fn band_top(spec: &LayoutSpec, band_idx: usize) -> u32 {
    spec.margin
        + spec.bands[..band_idx]
            .iter()
            .map(|b| b.height + spec.band_gap)
            .sum::<u32>()
}

fn place_content(spec: &LayoutSpec, rng: &mut ChaCha8Rng) -> Result<Layout> {
    let mut lines = Vec::new();
    let mut rules = Vec::new();
    let mut strips: Vec<(u32, u32)> = Vec::new();

    for (band_idx, band) in spec.bands.iter().enumerate() {
        let extents = column_extents(spec, band);
        for pair in extents.windows(2) {
            let strip = (pair[0].1 + 1, pair[1].0 - 1);
            if !strips.contains(&strip) {
                strips.push(strip);
            }
        }
        let top = band_top(spec, band_idx);
        let bottom = top + band.height - 1;
        for (col_idx, &(left, right)) in extents.iter().enumerate() {
            fill_column(spec, rng, band_idx, col_idx, left, right, top, bottom, &mut lines)?;
        }
        if spec.separator_rules && band_idx + 1 < spec.bands.len() {
            let rule_top = bottom + 1 + (spec.band_gap - RULE_HEIGHT) / 2;
            rules.push(rule_rect(spec, rule_top));
        }
    }
    if spec.separator_rules {
        // rules above the first and below the last band bound every strip
        // run at a fixed row, so stray whitespace in the margins cannot
        // stretch a separator's averaged extent
        let offset = (spec.band_gap - RULE_HEIGHT) / 2;
        let first_top = band_top(spec, 0);
        rules.insert(0, rule_rect(spec, first_top - offset - RULE_HEIGHT));
        let last = spec.bands.len() - 1;
        let last_bottom = band_top(spec, last) + spec.bands[last].height - 1;
        rules.push(rule_rect(spec, last_bottom + 1 + offset));
    }
    strips.sort_unstable();
    Ok(Layout {
        lines,
        rules,
        intended_strips: strips,
    })
}

fn rule_rect(spec: &LayoutSpec, top: u32) -> Rect {
    Rect::new(
        top,
        top + RULE_HEIGHT - 1,
        spec.margin,
        spec.page_width - spec.margin - 1,
    )
}

#[allow(clippy::too_many_arguments)]
fn fill_column(
    spec: &LayoutSpec,
    rng: &mut ChaCha8Rng,
    band: usize,
    col: usize,
    left: u32,
    right: u32,
    top: u32,
    bottom: u32,
    lines: &mut Vec<LineRec>,
) -> Result<()> {
    let mut y = top;
    let mut block = 0usize;
    let gh = spec.glyph_height;
    'fill: loop {
        // one text block: counts of indented vs base-margin lines placed so
        // far keep the modal margin at the base
        let mut indented_lines = 0u32;
        let mut normal_lines = 0u32;
        let n_paras = rng.gen_range(spec.paragraphs_per_block[0]..=spec.paragraphs_per_block[1]);
        let mut para = 0usize;
        let mut placed_any = false;
        while para < n_paras as usize {
            let want_indent = spec.indent > 0 && para > 0 && rng.gen_bool(0.5);
            let indent_ok = normal_lines > indented_lines;
            let indented = want_indent && indent_ok;
            let n_lines = rng.gen_range(spec.lines_per_paragraph[0]..=spec.lines_per_paragraph[1]);
            for li in 0..n_lines {
                let gap = if !placed_any && block == 0 {
                    0
                } else if !placed_any {
                    spec.block_gap
                } else if li == 0 && para > 0 {
                    if indented && rng.gen_bool(0.5) {
                        spec.line_gap
                    } else {
                        spec.paragraph_gap
                    }
                } else {
                    spec.line_gap
                };
                let line_top = y + gap;
                if line_top + gh - 1 > bottom {
                    break 'fill;
                }
                let line_left = if li == 0 && indented { left + spec.indent } else { left };
                let words = fill_line(spec, rng, line_top, line_left, right);
                if li == 0 && indented {
                    indented_lines += 1;
                } else {
                    normal_lines += 1;
                }
                lines.push(LineRec {
                    band,
                    col,
                    block,
                    para,
                    rect: Rect::new(line_top, line_top + gh - 1, line_left, right),
                    words,
                });
                y = line_top + gh;
                placed_any = true;
            }
            para += 1;
        }
        if !placed_any {
            break;
        }
        block += 1;
        debug_assert!(indented_lines <= normal_lines);
        // stop when not even one more line would fit
        if y + spec.block_gap + gh - 1 > bottom {
            break;
        }
    }
    Ok(())
}

/// Lays out one justified line of words. Glyph widths and word gaps carry a
/// random spread so character edges never align vertically across lines;
/// the final word absorbs leftover space with extra characters and a short
/// stretch of its last character, ending exactly at `right`. The first
/// character of the line renders full height, anchoring the line band.
fn fill_line(spec: &LayoutSpec, rng: &mut ChaCha8Rng, top: u32, left: u32, right: u32) -> Vec<WordRec> {
    let gh = spec.glyph_height;
    let (gw, cg, wg) = (spec.glyph_width, spec.char_gap, spec.word_gap);
    let bottom = top + gh - 1;
    let mut words: Vec<WordRec> = Vec::new();
    let mut x = left;
    let mut first_char = true;
    let mut parity = false;

    fn push_char(
        chars: &mut Vec<Rect>,
        boxes: &mut Vec<Rect>,
        (top, bottom, gh): (u32, u32, u32),
        (l, r): (u32, u32),
        first: &mut bool,
        parity: &mut bool,
    ) {
        let (bt, bb) = glyph_rows(top, gh, *first, *parity);
        *first = false;
        *parity = !*parity;
        chars.push(Rect::new(top, bottom, l, r));
        boxes.push(Rect::new(bt, bb, l, r));
    }
    let band = (top, bottom, gh);

    loop {
        let want = rng.gen_range(spec.chars_per_word[0]..=spec.chars_per_word[1]);
        let mut chars: Vec<Rect> = Vec::with_capacity(want as usize);
        let mut boxes: Vec<Rect> = Vec::with_capacity(want as usize);
        let w0 = (gw + rng.gen_range(0..=GLYPH_JITTER)).min(right - x + 1);
        push_char(&mut chars, &mut boxes, band, (x, x + w0 - 1), &mut first_char, &mut parity);
        let mut cx = x + w0;
        for _ in 1..want {
            let w = gw + rng.gen_range(0..=GLYPH_JITTER);
            if cx + cg + w - 1 > right {
                break;
            }
            push_char(&mut chars, &mut boxes, band, (cx + cg, cx + cg + w - 1), &mut first_char, &mut parity);
            cx += cg + w;
        }
        let gap = wg + rng.gen_range(0..=WORD_GAP_JITTER);
        let next_start = chars.last().unwrap().right + 1 + gap;
        if next_start + gw - 1 > right {
            // final word: pad with characters, then stretch the last one
            loop {
                let w = gw + rng.gen_range(0..=GLYPH_JITTER);
                let cx2 = chars.last().unwrap().right + 1 + cg;
                if cx2 + w - 1 > right {
                    break;
                }
                push_char(&mut chars, &mut boxes, band, (cx2, cx2 + w - 1), &mut first_char, &mut parity);
            }
            chars.last_mut().unwrap().right = right;
            boxes.last_mut().unwrap().right = right;
            words.push(WordRec {
                rect: Rect::new(top, bottom, x, right),
                chars,
                boxes,
            });
            break;
        }
        let word_right = chars.last().unwrap().right;
        words.push(WordRec {
            rect: Rect::new(top, bottom, x, word_right),
            chars,
            boxes,
        });
        x = next_start;
    }
    words
}

/// Measured separator strip geometry, mirroring the averaging rules on the
/// generator's own clean rendering.
struct MeasuredSeparator {
    v_alpha: u32,
    v_beta: u32,
    s_h: u32,
    e_h: u32,
}

fn white_runs_of_column(bitmap: &Bitmap, col: u32) -> Vec<(u32, u32)> {
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

fn measure_block_rects(
    clean: &Bitmap,
    layout: &Layout,
    cfg: &PipelineConfig,
) -> Result<Vec<Rect>> {
    let m = clean.height();
    let n = clean.width();
    let min_run = cfg.l_cs_v.resolve(m);

    // candidate group: column extent plus per-column qualifying runs
    type Group = (u32, u32, Vec<Vec<(u32, u32)>>);
    let mut groups: Vec<Group> = Vec::new();
    let mut current: Option<Group> = None;
    for col in 0..n {
        let qualifying: Vec<(u32, u32)> = white_runs_of_column(clean, col)
            .into_iter()
            .filter(|&(_, len)| len >= min_run)
            .collect();
        if qualifying.is_empty() {
            if let Some(g) = current.take() {
                groups.push(g);
            }
        } else {
            match &mut current {
                Some((_, beta, cols)) => {
                    *beta = col;
                    cols.push(qualifying);
                }
                None => current = Some((col, col, vec![qualifying])),
            }
        }
    }
    if let Some(g) = current.take() {
        groups.push(g);
    }

    // groups surviving the width and edge rules must be exactly the gutters
    let mut separators: Vec<MeasuredSeparator> = Vec::new();
    let mut surviving: Vec<(u32, u32)> = Vec::new();
    for (v_alpha, v_beta, columns) in groups {
        let width = v_beta - v_alpha + 1;
        let at_edge = v_alpha == 0 || v_beta == n - 1;
        if width < cfg.w_cs_v_min || width > cfg.w_cs_v_max || at_edge {
            // filtered the same way by the pipeline; narrow accidental
            // groups inside the text are harmless
            continue;
        }
        surviving.push((v_alpha, v_beta));
        let k = columns.iter().map(|q| q.len()).min().unwrap();
        let chosen: Vec<Vec<(u32, u32)>> = columns
            .iter()
            .map(|q| {
                let mut by_len = q.clone();
                by_len.sort_by_key(|&(start, len)| (std::cmp::Reverse(len), start));
                let mut top: Vec<(u32, u32)> = by_len[..k].to_vec();
                top.sort_unstable();
                top
            })
            .collect();
        for rank in 0..k {
            let count = width as u64;
            let len_sum: u64 = chosen.iter().map(|c| c[rank].1 as u64).sum();
            let above_sum: u64 = chosen.iter().map(|c| c[rank].0 as u64).sum();
            let round = |sum: u64| {
                let q = sum / count;
                let r = sum % count;
                (q + u64::from(2 * r >= count)) as u32
            };
            let (l_v, s_h) = (round(len_sum), round(above_sum));
            separators.push(MeasuredSeparator {
                v_alpha,
                v_beta,
                s_h,
                e_h: s_h + l_v,
            });
        }
    }
    if surviving != layout.intended_strips {
        return Err(infeasible(format!(
            "measured strips {surviving:?} differ from intended {:?}",
            layout.intended_strips
        )));
    }

    // band ordering over the measured separators
    let page = Rect::new(0, m - 1, 0, n - 1);
    if separators.is_empty() {
        return Ok(vec![page]);
    }
    let mut order: Vec<usize> = (0..separators.len()).collect();
    order.sort_by_key(|&i| (separators[i].s_h, separators[i].v_alpha, separators[i].e_h));
    let mut consumed = vec![false; separators.len()];
    let mut rects = Vec::new();
    while let Some(&ref_idx) = order.iter().find(|&&i| !consumed[i]) {
        let reference = &separators[ref_idx];
        let (lo, hi) = (reference.s_h as f64, reference.e_h as f64);
        let mut band: Vec<&MeasuredSeparator> = Vec::new();
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
        let top = reference.s_h.min(page.bottom);
        let bottom = reference.e_h.saturating_sub(1).min(page.bottom).max(top);
        let mut cursor_col = page.left;
        for sep in &band {
            if sep.v_alpha > cursor_col {
                rects.push(Rect::new(top, bottom, cursor_col, sep.v_alpha - 1));
            }
            cursor_col = cursor_col.max(sep.v_beta + 1);
        }
        if cursor_col <= page.right {
            rects.push(Rect::new(top, bottom, cursor_col, page.right));
        }
    }

    // every constructed line must land in exactly one block rect
    for line in &layout.lines {
        let holders = rects.iter().filter(|r| r.contains(&line.rect)).count();
        if holders != 1 {
            return Err(infeasible(format!(
                "line at {:?} contained in {holders} block rects",
                line.rect
            )));
        }
    }
    Ok(rects)
}

struct InvertedExtent {
    rect: Rect,
}

fn resolve_inverted_extents(
    spec: &LayoutSpec,
    layout: &Layout,
    block_rects: &[Rect],
) -> Result<Vec<InvertedExtent>> {
    let mut extents: Vec<InvertedExtent> = Vec::new();
    for band_spec in &spec.inverted_bands {
        let band = band_spec.band as usize;
        if band >= spec.bands.len() {
            return Err(infeasible("inverted band index out of range"));
        }
        let col = band_spec.column.unwrap_or(0) as usize;
        let col_lines: Vec<&LineRec> = layout
            .lines
            .iter()
            .filter(|l| l.band == band && l.col == col)
            .collect();
        let start = band_spec.start_line as usize;
        let end = start + band_spec.line_count as usize;
        if band_spec.line_count == 0 || end > col_lines.len() {
            return Err(infeasible("inverted band lines out of range"));
        }
        if band_spec.pad == 0 || band_spec.pad > spec.line_gap {
            return Err(infeasible("inverted band pad must stay within the line gap"));
        }
        let top = col_lines[start].rect.top - band_spec.pad;
        let bottom = col_lines[end - 1].rect.bottom + band_spec.pad;
        let rect = match band_spec.column {
            None => Rect::new(top, bottom, 0, spec.page_width - 1),
            Some(_) => {
                let anchor = col_lines[start].rect;
                let holder = block_rects
                    .iter()
                    .find(|r| r.contains(&anchor))
                    .ok_or_else(|| infeasible("inverted band column not inside a block"))?;
                if top < holder.top || bottom > holder.bottom {
                    return Err(infeasible("inverted band rows escape the block rect"));
                }
                Rect::new(top, bottom, holder.left, holder.right)
            }
        };
        if rect.height() < PipelineConfig::default().smooth_window {
            return Err(infeasible("inverted band shorter than the smoothing window"));
        }
        extents.push(InvertedExtent { rect });
    }
    // pairwise separation keeps the majority filter from bridging or
    // eroding the bands
    let window = PipelineConfig::default().smooth_window;
    for (i, a) in extents.iter().enumerate() {
        for b in &extents[i + 1..] {
            let gap = if a.rect.bottom < b.rect.top {
                b.rect.top - a.rect.bottom - 1
            } else if b.rect.bottom < a.rect.top {
                a.rect.top - b.rect.bottom - 1
            } else {
                return Err(infeasible("inverted bands overlap in rows"));
            };
            if gap < window {
                return Err(infeasible("inverted bands closer than the smoothing window"));
            }
        }
    }
    Ok(extents)
}

/// Simulates the detect-and-toggle fixpoint on exact black counts and
/// requires the toggled rows to be exactly `expected` (0-based within the
/// count slice). Mirrors the row-level arithmetic of normalization without
/// touching run data.
fn simulate_normalize(
    black: &mut [u64],
    width: u64,
    smooth_window: u32,
    expected: &[bool],
    what: &str,
) -> Result<()> {
    let rows = black.len();
    let half = (smooth_window / 2) as isize;
    let majority = smooth_window / 2 + 1;
    let mut toggled = vec![false; rows];
    for _pass in 0..=rows {
        let raw: Vec<bool> = black.iter().map(|&b| 2 * b > width).collect();
        let mut any = false;
        for i in 0..rows {
            let lo = (i as isize - half).max(0) as usize;
            let hi = (i + half as usize).min(rows - 1);
            let ones = raw[lo..=hi].iter().filter(|&&d| d).count() as u32;
            if raw[i] && ones >= majority {
                black[i] = width - black[i];
                toggled[i] = true;
                any = true;
            }
        }
        if !any {
            break;
        }
    }
    if toggled != expected {
        let diff = toggled
            .iter()
            .zip(expected)
            .position(|(t, e)| t != e)
            .unwrap();
        return Err(infeasible(format!(
            "{what}: row {diff} toggles {} but the layout expects {}",
            toggled[diff], expected[diff]
        )));
    }
    Ok(())
}

/// Validates, by exact count simulation, that page-level normalization
/// toggles precisely the page-wide extents and block-level normalization
/// precisely the column-local extents of each block.
fn validate_histograms(
    spec: &LayoutSpec,
    clean: &Bitmap,
    block_rects: &[Rect],
    extents: &[InvertedExtent],
) -> Result<()> {
    let n = spec.page_width as u64;
    let page_wide: Vec<&InvertedExtent> =
        extents.iter().filter(|e| e.rect.width() as u64 == n).collect();
    let local: Vec<&InvertedExtent> =
        extents.iter().filter(|e| (e.rect.width() as u64) < n).collect();

    let black_in = |r: u32, left: u32, right: u32| -> u64 {
        clean.row(r)[left as usize..=right as usize]
            .iter()
            .filter(|&&p| p == BLACK)
            .count() as u64
    };

    // page level: the emitted document carries all extent complements
    let mut black: Vec<u64> = (0..spec.page_height)
        .map(|r| {
            let base = black_in(r, 0, spec.page_width - 1);
            let mut value = base as i64;
            for e in &page_wide {
                if (e.rect.top..=e.rect.bottom).contains(&r) {
                    value = n as i64 - value;
                }
            }
            for e in &local {
                if (e.rect.top..=e.rect.bottom).contains(&r) {
                    let w = e.rect.width() as i64;
                    let b = black_in(r, e.rect.left, e.rect.right) as i64;
                    value += w - 2 * b;
                }
            }
            value as u64
        })
        .collect();
    let expected_page: Vec<bool> = (0..spec.page_height)
        .map(|r| page_wide.iter().any(|e| (e.rect.top..=e.rect.bottom).contains(&r)))
        .collect();
    simulate_normalize(&mut black, n, PipelineConfig::default().smooth_window, &expected_page, "page")?;

    // block level: after the page pass the crop is clean except for its own
    // column-local extents
    for rect in block_rects {
        let width = rect.width() as u64;
        let mut black: Vec<u64> = (rect.top..=rect.bottom)
            .map(|r| {
                let base = black_in(r, rect.left, rect.right);
                let inverted_here = local.iter().any(|e| {
                    e.rect.left == rect.left
                        && e.rect.right == rect.right
                        && (e.rect.top..=e.rect.bottom).contains(&r)
                });
                if inverted_here {
                    width - base
                } else {
                    base
                }
            })
            .collect();
        let expected: Vec<bool> = (rect.top..=rect.bottom)
            .map(|r| {
                local.iter().any(|e| {
                    e.rect.left == rect.left
                        && e.rect.right == rect.right
                        && (e.rect.top..=e.rect.bottom).contains(&r)
                })
            })
            .collect();
        simulate_normalize(
            &mut black,
            width,
            PipelineConfig::default().smooth_window,
            &expected,
            "block",
        )?;
    }
    Ok(())
}

/// Drops up to `speckle_count` black specks (1x1 to 2x2) on background that
/// stays at least three pixels clear of any ink, including other specks.
fn place_speckles(spec: &LayoutSpec, bitmap: &mut Bitmap, rng: &mut ChaCha8Rng) {
    let mut placed = 0;
    let mut attempts = 0;
    let max_attempts = spec.speckle_count * 40;
    while placed < spec.speckle_count && attempts < max_attempts {
        attempts += 1;
        let h = rng.gen_range(1..=2u32);
        let w = rng.gen_range(1..=2u32);
        if spec.page_height < h + 8 || spec.page_width < w + 8 {
            break;
        }
        let top = rng.gen_range(4..spec.page_height - h - 4);
        let left = rng.gen_range(4..spec.page_width - w - 4);
        let clear = Rect::new(top - 3, top + h + 2, left - 3, left + w + 2);
        let mut free = true;
        'scan: for r in clear.top..=clear.bottom {
            for c in clear.left..=clear.right {
                if bitmap.get(r, c) == BLACK {
                    free = false;
                    break 'scan;
                }
            }
        }
        if free {
            bitmap.fill(Rect::new(top, top + h - 1, left, left + w - 1), BLACK);
            placed += 1;
        }
    }
}

fn assemble_tree(spec: &LayoutSpec, layout: &Layout, block_rects: &[Rect]) -> Result<SegmentTree> {
    let page = Rect::new(0, spec.page_height - 1, 0, spec.page_width - 1);
    let mut root = SegmentNode::new(NodeKind::Page, page);
    for rect in block_rects {
        let mut members: Vec<&LineRec> =
            layout.lines.iter().filter(|l| rect.contains(&l.rect)).collect();
        if members.is_empty() {
            continue;
        }
        members.sort_by_key(|l| l.rect.top);
        let mut column = SegmentNode::new(NodeKind::Column, *rect);
        let mut block_key: Option<(usize, usize, usize)> = None;
        let mut para_key: Option<(usize, usize, usize, usize)> = None;
        let mut block_node: Option<SegmentNode> = None;
        let mut para_node: Option<SegmentNode> = None;
        for line in members {
            let bk = (line.band, line.col, line.block);
            let pk = (line.band, line.col, line.block, line.para);
            if block_key != Some(bk) {
                if let Some(p) = para_node.take() {
                    attach(&mut block_node, NodeKind::Block, p);
                }
                if let Some(b) = block_node.take() {
                    column.children.push(b);
                }
                block_key = Some(bk);
                para_key = None;
            }
            if para_key != Some(pk) {
                if let Some(p) = para_node.take() {
                    attach(&mut block_node, NodeKind::Block, p);
                }
                para_key = Some(pk);
            }
            let mut line_node = SegmentNode::new(NodeKind::Line, line.rect);
            for word in &line.words {
                let mut word_node = SegmentNode::new(NodeKind::Word, word.rect);
                for ch in &word.chars {
                    word_node.children.push(SegmentNode::new(NodeKind::Character, *ch));
                }
                line_node.children.push(word_node);
            }
            attach(&mut para_node, NodeKind::Paragraph, line_node);
        }
        if let Some(p) = para_node.take() {
            attach(&mut block_node, NodeKind::Block, p);
        }
        if let Some(b) = block_node.take() {
            column.children.push(b);
        }
        root.children.push(column);
    }
    Ok(SegmentTree::new(root))
}

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

fn ground_truth_from(tree: &SegmentTree, extents: &[InvertedExtent]) -> GroundTruth {
    let lines = tree
        .lines()
        .into_iter()
        .map(|rect| GtLine {
            rect,
            inverted: extents.iter().any(|e| e.rect.contains(&rect)),
        })
        .collect();
    GroundTruth { lines }
}
