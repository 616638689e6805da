use serde::{Deserialize, Serialize};

use crate::attr::{Color, Location, Shape};

/// Why an object is in the scene.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Required,
    NearMiss,
    Distractor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub color: Color,
    pub shape: Shape,
    pub loc: Location,
    pub frame_index: usize,
    pub provenance: Provenance,
}

impl SceneObject {
    pub fn new(color: Color, shape: Shape, loc: Location, frame_index: usize) -> Self {
        SceneObject {
            color,
            shape,
            loc,
            frame_index,
            provenance: Provenance::Required,
        }
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub index: usize,
    pub objects: Vec<SceneObject>,
}

impl Frame {
    pub fn new(index: usize) -> Self {
        Frame {
            index,
            objects: Vec::new(),
        }
    }

    /// Empty frames `0..n`.
    pub fn sequence(n: usize) -> Vec<Frame> {
        (0..n).map(Frame::new).collect()
    }

    pub fn push(&mut self, mut obj: SceneObject) {
        obj.frame_index = self.index;
        self.objects.push(obj);
    }

    /// Smallest center distance between `loc` and any object in this frame.
    pub fn min_distance(&self, loc: &Location) -> f64 {
        self.objects
            .iter()
            .map(|o| o.loc.distance(loc))
            .fold(f64::INFINITY, f64::min)
    }
}
