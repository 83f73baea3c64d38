//! Uncompressed binary page image, one byte per pixel (1 = black, 0 = white).
//!
//! The bitmap exists for codec round trips, PBM exchange, the synthetic
//! generator, and the decompress-then-segment reference path. The
//! compressed-domain segmentation pipeline never materializes one.

use crate::error::{Error, Result};
use crate::geom::Rect;

pub const WHITE: u8 = 0;
pub const BLACK: u8 = 1;

#[derive(Clone, PartialEq, Eq)]
pub struct Bitmap {
    height: u32,
    width: u32,
    pixels: Vec<u8>,
}

impl Bitmap {
    /// All-white bitmap of the given extent.
    pub fn new(height: u32, width: u32) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidBitmap("zero dimension".into()));
        }
        let len = height as usize * width as usize;
        Ok(Bitmap {
            height,
            width,
            pixels: vec![WHITE; len],
        })
    }

    pub fn from_pixels(height: u32, width: u32, pixels: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidBitmap("zero dimension".into()));
        }
        if pixels.len() != height as usize * width as usize {
            return Err(Error::InvalidBitmap(format!(
                "pixel count {} does not match {}x{}",
                pixels.len(),
                height,
                width
            )));
        }
        if let Some(bad) = pixels.iter().find(|&&p| p > 1) {
            return Err(Error::InvalidBitmap(format!("pixel value {bad} not in {{0,1}}")));
        }
        Ok(Bitmap {
            height,
            width,
            pixels,
        })
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn get(&self, row: u32, col: u32) -> u8 {
        self.pixels[row as usize * self.width as usize + col as usize]
    }

    pub fn set(&mut self, row: u32, col: u32, value: u8) {
        debug_assert!(value <= 1);
        self.pixels[row as usize * self.width as usize + col as usize] = value;
    }

    pub fn row(&self, row: u32) -> &[u8] {
        let w = self.width as usize;
        let start = row as usize * w;
        &self.pixels[start..start + w]
    }

    pub fn row_mut(&mut self, row: u32) -> &mut [u8] {
        let w = self.width as usize;
        let start = row as usize * w;
        &mut self.pixels[start..start + w]
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Storage size at one byte per pixel.
    pub fn byte_len(&self) -> usize {
        self.pixels.len()
    }

    /// Storage size at one bit per pixel, rows padded to whole bytes.
    pub fn packed_byte_len(&self) -> usize {
        self.height as usize * (self.width as usize).div_ceil(8)
    }

    /// Fills a rectangle with the given color.
    pub fn fill(&mut self, rect: Rect, value: u8) {
        debug_assert!(rect.bottom < self.height && rect.right < self.width);
        for r in rect.top..=rect.bottom {
            self.row_mut(r)[rect.left as usize..=rect.right as usize].fill(value);
        }
    }

    /// Complements every pixel in rows `top..=bottom`, columns `left..=right`.
    pub fn complement(&mut self, rect: Rect) {
        debug_assert!(rect.bottom < self.height && rect.right < self.width);
        for r in rect.top..=rect.bottom {
            for p in &mut self.row_mut(r)[rect.left as usize..=rect.right as usize] {
                *p = 1 - *p;
            }
        }
    }

    pub fn crop(&self, rect: Rect) -> Result<Bitmap> {
        if rect.bottom >= self.height || rect.right >= self.width {
            return Err(Error::OutOfBounds {
                rect: format!("{rect:?}"),
                height: self.height,
                width: self.width,
            });
        }
        let mut pixels = Vec::with_capacity(rect.height() as usize * rect.width() as usize);
        for r in rect.top..=rect.bottom {
            pixels.extend_from_slice(&self.row(r)[rect.left as usize..=rect.right as usize]);
        }
        Bitmap::from_pixels(rect.height(), rect.width(), pixels)
    }
}

impl std::fmt::Debug for Bitmap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Bitmap({}x{})", self.height, self.width)
    }
}
