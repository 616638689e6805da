//! Fixed RGB values for the 19 colors.

use crate::attr::Color;

pub type Rgb = [u8; 3];

pub const BACKGROUND: Rgb = [0, 0, 0];

/// Indexed by [`Color::index`].
pub const PALETTE: [Rgb; 19] = [
    [230, 25, 75],   // red
    [60, 180, 75],   // green
    [67, 99, 216],   // blue
    [255, 225, 25],  // yellow
    [145, 30, 180],  // purple
    [245, 130, 49],  // orange
    [66, 212, 244],  // cyan
    [240, 50, 230],  // magenta
    [191, 239, 69],  // lime
    [250, 190, 212], // pink
    [70, 153, 144],  // teal
    [220, 190, 255], // lavender
    [154, 99, 36],   // brown
    [255, 250, 200], // beige
    [128, 0, 0],     // maroon
    [170, 255, 195], // mint
    [128, 128, 0],   // olive
    [255, 127, 80],  // coral
    [0, 0, 117],     // navy
];

pub fn rgb(color: Color) -> Rgb {
    PALETTE[color.index()]
}

/// The color whose palette entry is exactly `px`.
pub fn color_of(px: Rgb) -> Option<Color> {
    PALETTE.iter().position(|&c| c == px).and_then(Color::from_index)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_are_distinct_and_visible() {
        for (i, a) in PALETTE.iter().enumerate() {
            assert_ne!(*a, BACKGROUND);
            assert!(PALETTE[i + 1..].iter().all(|b| b != a));
        }
        for &c in Color::ALL {
            assert_eq!(color_of(rgb(c)), Some(c));
        }
        assert_eq!(color_of(BACKGROUND), None);
    }
}
