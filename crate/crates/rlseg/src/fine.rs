//! Fine vertical segmentation of a text line into words and characters.
//!
//! The line's columns are popped through the vertical cursor; a column is
//! blank when every transition is white. Blank gaps at least the word
//! threshold wide separate words, narrower gaps separate characters, and a
//! maximal ink column band is one character (touching glyphs with no gap
//! stay merged).

use crate::cursor::{ColumnCursor, ColumnPop};
use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::run_matrix::RunMatrix;

/// Blank-column gap thresholds, in pixels.
#[derive(Debug, Clone)]
pub struct FineParams {
    /// Gaps >= this separate words (W_ws).
    pub word_gap: u32,
    /// Character gaps are strictly below this (W_cs); informational bound,
    /// any sub-word gap of at least one column splits characters.
    pub char_gap_bound: u32,
}

impl Default for FineParams {
    fn default() -> Self {
        FineParams {
            word_gap: 5,
            char_gap_bound: 5,
        }
    }
}

impl FineParams {
    pub fn validate(&self) -> Result<()> {
        if self.word_gap == 0 || self.char_gap_bound > self.word_gap {
            return Err(Error::InvalidParameter(format!(
                "char gap bound {} must not exceed word gap {}",
                self.char_gap_bound, self.word_gap
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnGapClass {
    Character,
    Word,
}

pub fn classify_column_gap(gap: u32, params: &FineParams) -> ColumnGapClass {
    if gap >= params.word_gap {
        ColumnGapClass::Word
    } else {
        ColumnGapClass::Character
    }
}

/// One word with its character children, in line-local coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSegment {
    pub rect: Rect,
    pub characters: Vec<Rect>,
}

/// Splits one line crop into words and characters. Rects span the full line
/// height; leading/trailing blank columns are trimmed. Errors with
/// `EmptyLine` when the crop holds no ink.
pub fn segment_line(line: &RunMatrix, params: &FineParams) -> Result<Vec<WordSegment>> {
    params.validate()?;
    let (top, bottom) = (0, line.height() - 1);

    // maximal ink column bands
    let mut cursor = ColumnCursor::new(line);
    let mut pop = ColumnPop::default();
    let mut bands: Vec<(u32, u32)> = Vec::new();
    let mut start: Option<u32> = None;
    for col in 0..line.width() {
        cursor.pop_into(&mut pop).expect("cursor covers the width");
        let has_ink = pop.transitions.contains(&1);
        match (has_ink, start) {
            (true, None) => start = Some(col),
            (false, Some(s)) => {
                bands.push((s, col - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        bands.push((s, line.width() - 1));
    }
    if bands.is_empty() {
        return Err(Error::EmptyLine);
    }

    // group character bands into words at wide gaps
    let mut words: Vec<Vec<(u32, u32)>> = vec![vec![bands[0]]];
    for pair in bands.windows(2) {
        let gap = pair[1].0 - pair[0].1 - 1;
        if classify_column_gap(gap, params) == ColumnGapClass::Word {
            words.push(Vec::new());
        }
        words.last_mut().unwrap().push(pair[1]);
    }

    Ok(words
        .into_iter()
        .map(|chars| {
            let left = chars.first().unwrap().0;
            let right = chars.last().unwrap().1;
            WordSegment {
                rect: Rect::new(top, bottom, left, right),
                characters: chars
                    .into_iter()
                    .map(|(l, r)| Rect::new(top, bottom, l, r))
                    .collect(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitmap::{Bitmap, BLACK};
    use proptest::prelude::*;

    #[test]
    fn column_gap_boundaries() {
        let p = FineParams::default();
        assert_eq!(classify_column_gap(4, &p), ColumnGapClass::Character);
        assert_eq!(classify_column_gap(5, &p), ColumnGapClass::Word);
    }

    /// Line with ink bands at the given (left, width) placements.
    fn line_with_bands(width: u32, bands: &[(u32, u32)]) -> RunMatrix {
        let mut b = Bitmap::new(8, width).unwrap();
        for &(left, w) in bands {
            b.fill(Rect::new(1, 6, left, left + w - 1), BLACK);
        }
        RunMatrix::from_bitmap(&b)
    }

    #[test]
    fn solid_band_is_one_word_one_character() {
        let m = line_with_bands(20, &[(3, 10)]);
        let words = segment_line(&m, &FineParams::default()).unwrap();
        assert_eq!(words.len(), 1);
        assert_eq!(words[0].characters.len(), 1);
        assert_eq!(words[0].rect, Rect::new(0, 7, 3, 12));
    }

    #[test]
    fn gaps_split_words_and_characters() {
        // bands separated by gaps 2 / 7 / 3
        let m = line_with_bands(60, &[(2, 5), (9, 5), (21, 5), (29, 5)]);
        let words = segment_line(&m, &FineParams::default()).unwrap();
        assert_eq!(words.len(), 2);
        assert_eq!(words[0].characters.len(), 2);
        assert_eq!(words[1].characters.len(), 2);
        assert_eq!(words[0].rect, Rect::new(0, 7, 2, 13));
        assert_eq!(words[1].rect, Rect::new(0, 7, 21, 33));
    }

    #[test]
    fn empty_line_is_an_error() {
        let m = RunMatrix::from_bitmap(&Bitmap::new(8, 20).unwrap());
        assert!(matches!(
            segment_line(&m, &FineParams::default()),
            Err(Error::EmptyLine)
        ));
    }

    #[test]
    fn characters_tile_their_word() {
        let m = line_with_bands(40, &[(2, 4), (8, 4), (14, 4)]);
        let words = segment_line(&m, &FineParams::default()).unwrap();
        assert_eq!(words.len(), 1);
        let w = &words[0];
        assert_eq!(w.rect.left, w.characters.first().unwrap().left);
        assert_eq!(w.rect.right, w.characters.last().unwrap().right);
        for pair in w.characters.windows(2) {
            assert!(pair[0].right < pair[1].left);
        }
    }

    proptest! {
        #[test]
        fn blank_columns_match_pixel_oracle(seed in 0u64..300) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (h, w) = (6u32, 30u32);
            let pixels: Vec<u8> = (0..h * w).map(|_| u8::from(rng.gen_bool(0.2))).collect();
            let b = Bitmap::from_pixels(h, w, pixels).unwrap();
            let m = RunMatrix::from_bitmap(&b);
            let mut cursor = ColumnCursor::new(&m);
            for c in 0..w {
                let pop = cursor.pop_column().unwrap();
                let blank_compressed = pop.transitions.iter().all(|&t| t == 0);
                let blank_pixels = (0..h).all(|r| b.get(r, c) == 0);
                prop_assert_eq!(blank_compressed, blank_pixels);
            }
        }

        #[test]
        fn raising_word_gap_never_increases_word_count(
            gaps in proptest::collection::vec(1u32..12, 1..6),
        ) {
            let mut bands = vec![(2u32, 4u32)];
            let mut x = 6u32;
            for g in gaps {
                x += g;
                bands.push((x, 4));
                x += 4;
            }
            let m = line_with_bands(x + 6, &bands);
            let count = |word_gap: u32| {
                let p = FineParams { word_gap, char_gap_bound: word_gap };
                segment_line(&m, &p).unwrap().len()
            };
            prop_assert!(count(7) <= count(4));
        }
    }
}
