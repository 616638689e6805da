//! Binary glyph masks.
//!
//! Geometric shapes are filled analytically in doubled pixel coordinates
//! (pixel `i` has center `2i + 1`) so every test is an integer comparison.
//! Letters are the 5x7 font scaled by nearest neighbor.

use crate::attr::Shape;

use super::font::{pixel, FONT_HEIGHT, FONT_WIDTH};

/// Smallest supported glyph box.
pub const MIN_BOX: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mask {
    pub size: usize,
    bits: Vec<bool>,
}

impl Mask {
    fn from_fn(size: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(size * size);
        for y in 0..size {
            for x in 0..size {
                bits.push(f(x, y));
            }
        }
        Mask { size, bits }
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.size + x]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn transpose(&self) -> Mask {
        Mask::from_fn(self.size, |x, y| self.get(y, x))
    }
}

/// Mask of `shape` in a `size × size` box. Panics if `size < MIN_BOX`.
pub fn glyph(shape: Shape, size: usize) -> Mask {
    assert!(size >= MIN_BOX, "glyph box {size} is below {MIN_BOX}");
    let n = size as i64;
    let m = (n / 8).max(1);
    // Distance of pixel i's center from the box center, doubled.
    let d = |i: usize| (2 * i as i64 + 1 - n).abs();
    let inside = |i: usize| (m..n - m).contains(&(i as i64));
    let bar = n / 4;
    match shape {
        Shape::Circle => Mask::from_fn(size, |x, y| {
            let (dx, dy) = (d(x), d(y));
            dx * dx + dy * dy <= (n - 2 * m) * (n - 2 * m)
        }),
        Shape::Square => Mask::from_fn(size, |x, y| inside(x) && inside(y)),
        Shape::Triangle => Mask::from_fn(size, |x, y| inside(y) && d(x) <= y as i64 - m + 1),
        Shape::Cross => Mask::from_fn(size, |x, y| inside(x) && inside(y) && (d(x) <= bar || d(y) <= bar)),
        Shape::VBar => Mask::from_fn(size, |x, y| inside(y) && d(x) <= bar),
        Shape::HBar => Mask::from_fn(size, |x, y| inside(x) && d(y) <= bar),
        letter => {
            let index = letter.index() - Shape::A.index();
            let h = n - 2 * m;
            let w = (h * FONT_WIDTH as i64 / FONT_HEIGHT as i64).max(1);
            let x0 = (n - w) / 2;
            Mask::from_fn(size, |x, y| {
                let (x, y) = (x as i64 - x0, y as i64 - m);
                (0..w).contains(&x)
                    && (0..h).contains(&y)
                    && pixel(
                        index,
                        (x * FONT_WIDTH as i64 / w) as usize,
                        (y * FONT_HEIGHT as i64 / h) as usize,
                    )
            })
        }
    }
}
