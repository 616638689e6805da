//! Task instances: a graph with every free slot bound.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attr::{Color, Location, Relation, Shape, SpatialRange, TimeRef};
use crate::graph::{AnchorParam, AttrParam, Literal, SelectParams, Slot, SlotKind, TaskGraph};
use crate::rng::{choose, uniform};

/// Anchors of free spatial ranges are drawn from this square.
pub const ANCHOR_RANGE: (f64, f64) = (0.1, 0.9);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "slot", content = "value", rename_all = "lowercase")]
pub enum Binding {
    Color(Color),
    Shape(Shape),
    Time(TimeRef),
    Relation(Relation),
    Anchor(Location),
}

impl Binding {
    fn fits(&self, kind: &SlotKind) -> bool {
        match (self, kind) {
            (Binding::Color(_), SlotKind::Color)
            | (Binding::Shape(_), SlotKind::Shape)
            | (Binding::Relation(_), SlotKind::Relation)
            | (Binding::Anchor(_), SlotKind::Anchor) => true,
            (Binding::Time(t), SlotKind::Time(allowed)) => allowed.contains(t),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskInstance {
    pub task: String,
    pub graph: Arc<TaskGraph>,
    pub bindings: Vec<Binding>,
}

/// A `Select` with its given parameters resolved. Wired parameters stay `None`
/// here and are filled in from upstream values by the interpreter.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectDesc {
    pub color: Option<Color>,
    pub shape: Option<Shape>,
    pub space: Option<SpatialRange>,
    pub time: TimeRef,
}

impl SelectDesc {
    pub fn matches(&self, color: Color, shape: Shape, loc: &Location) -> bool {
        self.color.is_none_or(|c| c == color)
            && self.shape.is_none_or(|s| s == shape)
            && self.space.is_none_or(|r| r.contains(loc))
    }
}

impl TaskInstance {
    /// Binds `bindings` to `graph`, checking slot count and kinds.
    pub fn new(task: impl Into<String>, graph: Arc<TaskGraph>, bindings: Vec<Binding>) -> Option<Self> {
        if bindings.len() != graph.slots().len()
            || !bindings.iter().zip(graph.slots()).all(|(b, k)| b.fits(k))
            || graph.distinct_pairs().iter().any(|&(a, b)| bindings[a] == bindings[b])
        {
            return None;
        }
        Some(TaskInstance {
            task: task.into(),
            graph,
            bindings,
        })
    }

    pub fn color(&self, slot: &Slot<Color>) -> Color {
        match slot {
            Slot::Fixed(c) => *c,
            Slot::Free(i) => match self.bindings[*i] {
                Binding::Color(c) => c,
                ref b => unreachable!("slot {i} bound to {b:?}"),
            },
        }
    }

    pub fn shape(&self, slot: &Slot<Shape>) -> Shape {
        match slot {
            Slot::Fixed(s) => *s,
            Slot::Free(i) => match self.bindings[*i] {
                Binding::Shape(s) => s,
                ref b => unreachable!("slot {i} bound to {b:?}"),
            },
        }
    }

    pub fn time(&self, slot: &Slot<TimeRef>) -> TimeRef {
        match slot {
            Slot::Fixed(t) => *t,
            Slot::Free(i) => match self.bindings[*i] {
                Binding::Time(t) => t,
                ref b => unreachable!("slot {i} bound to {b:?}"),
            },
        }
    }

    pub fn relation(&self, slot: &Slot<Relation>) -> Relation {
        match slot {
            Slot::Fixed(r) => *r,
            Slot::Free(i) => match self.bindings[*i] {
                Binding::Relation(r) => r,
                ref b => unreachable!("slot {i} bound to {b:?}"),
            },
        }
    }

    pub fn anchor(&self, slot: &Slot<Location>) -> Location {
        match slot {
            Slot::Fixed(l) => *l,
            Slot::Free(i) => match self.bindings[*i] {
                Binding::Anchor(l) => l,
                ref b => unreachable!("slot {i} bound to {b:?}"),
            },
        }
    }

    pub fn literal(&self, lit: &Literal) -> Binding {
        match lit {
            Literal::Color(s) => Binding::Color(self.color(s)),
            Literal::Shape(s) => Binding::Shape(self.shape(s)),
        }
    }

    /// Given parameters of a `Select`; wired ones are left unset.
    pub fn select_desc(&self, p: &SelectParams) -> SelectDesc {
        SelectDesc {
            color: match &p.color {
                AttrParam::Given(s) => Some(self.color(s)),
                _ => None,
            },
            shape: match &p.shape {
                AttrParam::Given(s) => Some(self.shape(s)),
                _ => None,
            },
            space: p.space.as_ref().and_then(|sp| match &sp.anchor {
                AnchorParam::Given(a) => Some(SpatialRange::new(self.relation(&sp.relation), self.anchor(a))),
                AnchorParam::Wired => None,
            }),
            time: self.time(&p.time),
        }
    }
}

/// Draws a uniform value for one slot.
pub fn draw_binding<R: Rng + ?Sized>(kind: &SlotKind, rng: &mut R) -> Binding {
    match kind {
        SlotKind::Color => Binding::Color(*choose(rng, Color::ALL)),
        SlotKind::Shape => Binding::Shape(*choose(rng, Shape::ALL)),
        SlotKind::Time(allowed) => Binding::Time(*choose(rng, allowed)),
        SlotKind::Relation => Binding::Relation(*choose(rng, Relation::ALL)),
        SlotKind::Anchor => {
            let (lo, hi) = ANCHOR_RANGE;
            let x = uniform(rng, lo, hi);
            let y = uniform(rng, lo, hi);
            Binding::Anchor(Location::new(x, y))
        }
    }
}

/// Binds every free slot of `graph` by a uniform draw. The later slot of a
/// distinct pair is uniform over the values its partner did not take.
pub fn instantiate<R: Rng + ?Sized>(task: &str, graph: &Arc<TaskGraph>, rng: &mut R) -> TaskInstance {
    let mut bindings: Vec<Binding> = Vec::with_capacity(graph.slots().len());
    for (i, kind) in graph.slots().iter().enumerate() {
        let mut b = draw_binding(kind, rng);
        if let Some(j) = graph.distinct_from(i) {
            while b == bindings[j] {
                b = draw_binding(kind, rng);
            }
        }
        bindings.push(b);
    }
    TaskInstance {
        task: task.to_string(),
        graph: Arc::clone(graph),
        bindings,
    }
}
