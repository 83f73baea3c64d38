//! Axis-aligned rectangles in page pixel coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inclusive pixel rectangle: rows `top..=bottom`, columns `left..=right`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub top: u32,
    pub bottom: u32,
    pub left: u32,
    pub right: u32,
}

impl Rect {
    pub fn new(top: u32, bottom: u32, left: u32, right: u32) -> Self {
        debug_assert!(top <= bottom && left <= right);
        Rect {
            top,
            bottom,
            left,
            right,
        }
    }

    /// Validates the rectangle against a `height` x `width` extent.
    pub fn checked(top: u32, bottom: u32, left: u32, right: u32, height: u32, width: u32) -> Result<Self> {
        if top > bottom || left > right || bottom >= height || right >= width {
            return Err(Error::OutOfBounds {
                rect: format!("[{top},{bottom}]x[{left},{right}]"),
                height,
                width,
            });
        }
        Ok(Rect::new(top, bottom, left, right))
    }

    pub fn height(&self) -> u32 {
        self.bottom - self.top + 1
    }

    pub fn width(&self) -> u32 {
        self.right - self.left + 1
    }

    pub fn contains(&self, other: &Rect) -> bool {
        self.top <= other.top
            && other.bottom <= self.bottom
            && self.left <= other.left
            && other.right <= self.right
    }

    /// Smallest rectangle covering both operands.
    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            top: self.top.min(other.top),
            bottom: self.bottom.max(other.bottom),
            left: self.left.min(other.left),
            right: self.right.max(other.right),
        }
    }

    /// Shifts the rectangle by a row/column offset.
    pub fn translated(&self, row_offset: u32, col_offset: u32) -> Rect {
        Rect {
            top: self.top + row_offset,
            bottom: self.bottom + row_offset,
            left: self.left + col_offset,
            right: self.right + col_offset,
        }
    }

    /// Overlap length of the vertical intervals, in rows.
    pub fn vertical_overlap(&self, other: &Rect) -> u32 {
        interval_overlap(self.top, self.bottom, other.top, other.bottom)
    }

    /// Overlap length of the horizontal intervals, in columns.
    pub fn horizontal_overlap(&self, other: &Rect) -> u32 {
        interval_overlap(self.left, self.right, other.left, other.right)
    }
}

fn interval_overlap(a0: u32, a1: u32, b0: u32, b1: u32) -> u32 {
    let lo = a0.max(b0);
    let hi = a1.min(b1);
    if lo > hi {
        0
    } else {
        hi - lo + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checked_rejects_out_of_bounds() {
        assert!(Rect::checked(0, 4, 0, 4, 5, 5).is_ok());
        assert!(Rect::checked(0, 5, 0, 4, 5, 5).is_err());
        assert!(Rect::checked(3, 2, 0, 4, 5, 5).is_err());
    }

    #[test]
    fn overlap_is_symmetric_and_clipped() {
        let a = Rect::new(0, 9, 0, 9);
        let b = Rect::new(5, 14, 8, 20);
        assert_eq!(a.vertical_overlap(&b), 5);
        assert_eq!(b.vertical_overlap(&a), 5);
        assert_eq!(a.horizontal_overlap(&b), 2);
        let c = Rect::new(20, 30, 0, 9);
        assert_eq!(a.vertical_overlap(&c), 0);
    }

    #[test]
    fn rect_serializes_with_flat_fields() {
        let r = Rect::new(1, 2, 3, 4);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, r#"{"top":1,"bottom":2,"left":3,"right":4}"#);
    }
}
