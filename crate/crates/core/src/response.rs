//! Response values and output spaces.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::attr::{Color, Location, Shape};

/// Side length of the pointing grid.
pub const POINTING_GRID: usize = 7;

/// Output of a task at one frame.
#[derive(Clone, Debug, PartialEq)]
pub enum ResponseValue {
    Verbal(String),
    Point(Location),
    Bool(bool),
    Invalid,
}

impl ResponseValue {
    pub fn color(c: Color) -> Self {
        ResponseValue::Verbal(c.word().to_string())
    }

    pub fn shape(s: Shape) -> Self {
        ResponseValue::Verbal(s.word().to_string())
    }

    pub fn is_invalid(&self) -> bool {
        matches!(self, ResponseValue::Invalid)
    }

    /// The verbal word of this response, with booleans mapped to `true`/`false`.
    pub fn word(&self) -> Option<&str> {
        match self {
            ResponseValue::Verbal(w) => Some(w),
            ResponseValue::Bool(true) => Some("true"),
            ResponseValue::Bool(false) => Some("false"),
            _ => None,
        }
    }

    /// Short label used for histograms: the word, `point`, or `invalid`.
    pub fn class_label(&self) -> String {
        match self {
            ResponseValue::Point(_) => "point".to_string(),
            ResponseValue::Invalid => "invalid".to_string(),
            other => other.word().unwrap_or_default().to_string(),
        }
    }
}

impl fmt::Display for ResponseValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResponseValue::Point(l) => write!(f, "point {l}"),
            ResponseValue::Invalid => f.write_str("invalid"),
            other => f.write_str(other.word().unwrap_or_default()),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum WireResponse {
    Verbal { word: String },
    Bool { word: String },
    Point { x: f64, y: f64 },
    Invalid,
}

impl Serialize for ResponseValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let wire = match self {
            ResponseValue::Verbal(w) => WireResponse::Verbal { word: w.clone() },
            ResponseValue::Bool(b) => WireResponse::Bool { word: b.to_string() },
            ResponseValue::Point(l) => WireResponse::Point { x: l.x, y: l.y },
            ResponseValue::Invalid => WireResponse::Invalid,
        };
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ResponseValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match WireResponse::deserialize(d)? {
            WireResponse::Verbal { word } => ResponseValue::Verbal(word),
            WireResponse::Bool { word } => match word.as_str() {
                "true" => ResponseValue::Bool(true),
                "false" => ResponseValue::Bool(false),
                other => {
                    return Err(serde::de::Error::custom(format!(
                        "boolean word must be true or false, got `{other}`"
                    )))
                }
            },
            WireResponse::Point { x, y } => ResponseValue::Point(Location::new(x, y)),
            WireResponse::Invalid => ResponseValue::Invalid,
        })
    }
}

/// Output domain of a task graph root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputSpace {
    Bool,
    Colors,
    Shapes,
    Pointing,
    /// Output of a `Switch`, tagged by branch.
    Switch {
        then: Box<OutputSpace>,
        otherwise: Box<OutputSpace>,
    },
}

impl OutputSpace {
    /// Distinct non-switch spaces reachable from this one.
    pub fn leaves(&self) -> Vec<OutputSpace> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<OutputSpace>) {
        match self {
            OutputSpace::Switch { then, otherwise } => {
                then.collect_leaves(out);
                otherwise.collect_leaves(out);
            }
            leaf => {
                if !out.contains(leaf) {
                    out.push(leaf.clone());
                }
            }
        }
    }

    /// Number of discrete answer classes; pointing counts as the 49 grid cells.
    pub fn class_count(&self) -> usize {
        self.leaves()
            .iter()
            .map(|l| match l {
                OutputSpace::Bool => 2,
                OutputSpace::Colors => Color::ALL.len(),
                OutputSpace::Shapes => Shape::ALL.len(),
                OutputSpace::Pointing => POINTING_GRID * POINTING_GRID,
                OutputSpace::Switch { .. } => unreachable!(),
            })
            .sum()
    }

    pub fn is_bool(&self) -> bool {
        self.leaves() == [OutputSpace::Bool]
    }

    pub fn has_pointing(&self) -> bool {
        self.leaves().contains(&OutputSpace::Pointing)
    }

    /// Words of the verbal part of the space, in canonical order.
    pub fn verbal_words(&self) -> Vec<&'static str> {
        let mut words = Vec::new();
        for leaf in self.leaves() {
            match leaf {
                OutputSpace::Bool => words.extend(["true", "false"]),
                OutputSpace::Colors => words.extend(Color::ALL.iter().map(|c| c.word())),
                OutputSpace::Shapes => words.extend(Shape::ALL.iter().map(|s| s.word())),
                _ => {}
            }
        }
        words
    }

    pub fn contains(&self, value: &ResponseValue) -> bool {
        match self {
            OutputSpace::Switch { then, otherwise } => then.contains(value) || otherwise.contains(value),
            OutputSpace::Bool => matches!(value, ResponseValue::Bool(_)),
            OutputSpace::Colors => match value {
                ResponseValue::Verbal(w) => w.parse::<Color>().is_ok(),
                _ => false,
            },
            OutputSpace::Shapes => match value {
                ResponseValue::Verbal(w) => w.parse::<Shape>().is_ok(),
                _ => false,
            },
            OutputSpace::Pointing => match value {
                ResponseValue::Point(l) => l.in_unit_square(),
                _ => false,
            },
        }
    }
}
