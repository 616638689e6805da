//! Object attributes: colors, shapes, locations, spatial ranges and time references.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;

macro_rules! word_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $word:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(into = "&'static str", try_from = "String")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn word(self) -> &'static str {
                match self {
                    $($name::$variant => $word),+
                }
            }

            pub fn index(self) -> usize {
                self as usize
            }

            pub fn from_index(i: usize) -> Option<Self> {
                Self::ALL.get(i).copied()
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.word())
            }
        }

        impl FromStr for $name {
            type Err = ParseError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($word => Ok($name::$variant),)+
                    _ => Err(ParseError::UnknownWord {
                        kind: stringify!($name),
                        word: s.to_string(),
                    }),
                }
            }
        }

        impl From<$name> for &'static str {
            fn from(v: $name) -> &'static str {
                v.word()
            }
        }

        impl TryFrom<String> for $name {
            type Error = ParseError;

            fn try_from(s: String) -> Result<Self, Self::Error> {
                s.parse()
            }
        }
    };
}

word_enum! {
    /// The 19 object colors. RGB values live in [`crate::render::palette`].
    Color {
        Red => "red",
        Green => "green",
        Blue => "blue",
        Yellow => "yellow",
        Purple => "purple",
        Orange => "orange",
        Cyan => "cyan",
        Magenta => "magenta",
        Lime => "lime",
        Pink => "pink",
        Teal => "teal",
        Lavender => "lavender",
        Brown => "brown",
        Beige => "beige",
        Maroon => "maroon",
        Mint => "mint",
        Olive => "olive",
        Coral => "coral",
        Navy => "navy",
    }
}

word_enum! {
    /// The 32 object shapes: six geometric shapes followed by the letters a-z.
    Shape {
        Circle => "circle",
        Square => "square",
        Triangle => "triangle",
        Cross => "cross",
        VBar => "vbar",
        HBar => "hbar",
        A => "a", B => "b", C => "c", D => "d", E => "e", F => "f", G => "g",
        H => "h", I => "i", J => "j", K => "k", L => "l", M => "m", N => "n",
        O => "o", P => "p", Q => "q", R => "r", S => "s", T => "t", U => "u",
        V => "v", W => "w", X => "x", Y => "y", Z => "z",
    }
}

word_enum! {
    /// Relative position in time used by `Select`.
    TimeRef {
        Now => "now",
        Last => "last",
        Latest => "latest",
    }
}

word_enum! {
    /// Half-plane relation of a spatial range. `y` grows downwards, so
    /// `above` means a smaller `y`.
    Relation {
        LeftOf => "left",
        RightOf => "right",
        Above => "above",
        Below => "below",
    }
}

impl Shape {
    pub fn is_letter(self) -> bool {
        self.index() >= Shape::A.index()
    }
}

impl Relation {
    pub fn opposite(self) -> Relation {
        match self {
            Relation::LeftOf => Relation::RightOf,
            Relation::RightOf => Relation::LeftOf,
            Relation::Above => Relation::Below,
            Relation::Below => Relation::Above,
        }
    }

    /// Phrase used in instructions.
    pub fn phrase(self) -> &'static str {
        match self {
            Relation::LeftOf => "left of",
            Relation::RightOf => "right of",
            Relation::Above => "above",
            Relation::Below => "below",
        }
    }
}

pub const NUM_COLORS: usize = 19;
pub const NUM_SHAPES: usize = 32;

/// A point on the canvas in canvas fractions, `(0, 0)` top-left.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub x: f64,
    pub y: f64,
}

impl Location {
    pub fn new(x: f64, y: f64) -> Self {
        Location { x, y }
    }

    pub fn in_unit_square(&self) -> bool {
        (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }

    pub fn distance(&self, other: &Location) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.2}, {:.2})", self.x, self.y)
    }
}

/// Strict half-plane relative to an anchor location.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialRange {
    pub relation: Relation,
    pub anchor: Location,
}

impl SpatialRange {
    pub fn new(relation: Relation, anchor: Location) -> Self {
        SpatialRange { relation, anchor }
    }

    /// Ties are outside the range.
    pub fn contains(&self, loc: &Location) -> bool {
        match self.relation {
            Relation::LeftOf => loc.x < self.anchor.x,
            Relation::RightOf => loc.x > self.anchor.x,
            Relation::Above => loc.y < self.anchor.y,
            Relation::Below => loc.y > self.anchor.y,
        }
    }

    pub fn opposite(&self) -> SpatialRange {
        SpatialRange::new(self.relation.opposite(), self.anchor)
    }

    /// Axis-aligned intersection of the half-plane with `[lo, hi]^2`, as
    /// `(x_min, x_max, y_min, y_max)`.
    pub fn clip(&self, lo: f64, hi: f64) -> (f64, f64, f64, f64) {
        let (ax, ay) = (self.anchor.x, self.anchor.y);
        match self.relation {
            Relation::LeftOf => (lo, ax.min(hi), lo, hi),
            Relation::RightOf => (ax.max(lo), hi, lo, hi),
            Relation::Above => (lo, hi, lo, ay.min(hi)),
            Relation::Below => (lo, hi, ay.max(lo), hi),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attribute_cardinalities() {
        assert_eq!(Color::ALL.len(), NUM_COLORS);
        assert_eq!(Shape::ALL.len(), NUM_SHAPES);
        assert_eq!(Color::ALL.len() * Shape::ALL.len(), 608);
        assert_eq!(Shape::ALL.iter().filter(|s| !s.is_letter()).count(), 6);
    }

    #[test]
    fn words_round_trip_and_are_unique() {
        let mut words: Vec<&str> = Color::ALL.iter().map(|c| c.word()).collect();
        words.extend(Shape::ALL.iter().map(|s| s.word()));
        let n = words.len();
        words.sort();
        words.dedup();
        assert_eq!(words.len(), n);
        for c in Color::ALL {
            assert_eq!(c.word().parse::<Color>().unwrap(), *c);
        }
        for s in Shape::ALL {
            assert_eq!(s.word().parse::<Shape>().unwrap(), *s);
        }
        assert!("mauve".parse::<Color>().is_err());
    }

    #[test]
    fn half_plane_is_strict() {
        let r = SpatialRange::new(Relation::LeftOf, Location::new(0.5, 0.5));
        assert!(r.contains(&Location::new(0.49, 0.9)));
        assert!(!r.contains(&Location::new(0.5, 0.1)));
        assert!(r.opposite().contains(&Location::new(0.51, 0.1)));
        let above = SpatialRange::new(Relation::Above, Location::new(0.5, 0.5));
        assert!(above.contains(&Location::new(0.9, 0.2)));
        assert!(!above.contains(&Location::new(0.9, 0.7)));
    }
}
