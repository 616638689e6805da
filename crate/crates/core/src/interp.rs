//! Forward interpreter: evaluates a task instance on a frame history.
//!
//! Evaluation is demand driven from the root with memoization, which visits
//! the required nodes in topological order and never touches the branch a
//! `Switch` does not take. A [`Probe`] observes frame reads and node
//! evaluations for instrumentation.

use std::ops::RangeInclusive;

use crate::attr::{Color, Location, Shape, SpatialRange, TimeRef};
use crate::graph::{AnchorParam, AttrParam, NodeId, Operator, Port, SelectParams};
use crate::instance::{Binding, SelectDesc, TaskInstance};
use crate::response::ResponseValue;
use crate::scene::{Frame, SceneObject};

/// Reference to an object in a frame history.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjRef {
    pub frame: usize,
    pub index: usize,
}

impl ObjRef {
    pub fn get<'f>(&self, frames: &'f [Frame]) -> &'f SceneObject {
        &frames[self.frame].objects[self.index]
    }
}

/// Intermediate value of an operator.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Objects(Vec<ObjRef>),
    Color(Color),
    Shape(Shape),
    Loc(Location),
    Bool(bool),
    Invalid,
}

impl Value {
    pub fn is_invalid(&self) -> bool {
        matches!(self, Value::Invalid)
    }

    pub fn into_response(self) -> ResponseValue {
        match self {
            Value::Color(c) => ResponseValue::color(c),
            Value::Shape(s) => ResponseValue::shape(s),
            Value::Loc(l) => ResponseValue::Point(l),
            Value::Bool(b) => ResponseValue::Bool(b),
            Value::Invalid | Value::Objects(_) => ResponseValue::Invalid,
        }
    }
}

/// Observer hooks for instrumented evaluation.
pub trait Probe {
    fn frame_read(&mut self, _frame: usize) {}
    fn node_evaluated(&mut self, _node: NodeId) {}
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NoProbe;

impl Probe for NoProbe {}

/// Records every frame read and node evaluation.
#[derive(Clone, Debug, Default)]
pub struct RecordingProbe {
    pub frames_read: Vec<usize>,
    pub nodes_evaluated: Vec<NodeId>,
}

impl Probe for RecordingProbe {
    fn frame_read(&mut self, frame: usize) {
        self.frames_read.push(frame);
    }

    fn node_evaluated(&mut self, node: NodeId) {
        self.nodes_evaluated.push(node);
    }
}

/// Frames a `Select` with time reference `time` may read at frame `t`.
/// `None` when `last` has no earlier frame to look at.
pub fn time_window(time: TimeRef, t: usize, max_memory: usize) -> Option<RangeInclusive<usize>> {
    match time {
        TimeRef::Now => Some(t..=t),
        TimeRef::Latest => Some(t.saturating_sub(max_memory)..=t),
        TimeRef::Last => {
            if t == 0 || max_memory == 0 {
                None
            } else {
                Some(t.saturating_sub(max_memory)..=t - 1)
            }
        }
    }
}

/// Objects selected by `desc` at frame `t`: the matches of the most recent
/// frame in the window that has any. Returns `Invalid` for an empty `last`
/// window.
pub fn select_objects<P: Probe>(
    desc: &SelectDesc,
    frames: &[Frame],
    t: usize,
    max_memory: usize,
    probe: &mut P,
) -> Value {
    let Some(window) = time_window(desc.time, t, max_memory) else {
        return Value::Invalid;
    };
    for f in window.rev() {
        if f >= frames.len() {
            continue;
        }
        probe.frame_read(f);
        let hits: Vec<ObjRef> = frames[f]
            .objects
            .iter()
            .enumerate()
            .filter(|(_, o)| desc.matches(o.color, o.shape, &o.loc))
            .map(|(index, _)| ObjRef { frame: f, index })
            .collect();
        if !hits.is_empty() {
            return Value::Objects(hits);
        }
    }
    Value::Objects(Vec::new())
}

/// All matches anywhere in the window, before the most-recent-frame rule.
pub fn window_matches(desc: &SelectDesc, frames: &[Frame], t: usize, max_memory: usize) -> Vec<ObjRef> {
    let Some(window) = time_window(desc.time, t, max_memory) else {
        return Vec::new();
    };
    window
        .filter(|&f| f < frames.len())
        .flat_map(|f| {
            frames[f]
                .objects
                .iter()
                .enumerate()
                .filter(|(_, o)| desc.matches(o.color, o.shape, &o.loc))
                .map(move |(index, _)| ObjRef { frame: f, index })
        })
        .collect()
}

pub struct Interpreter<'a, P: Probe = NoProbe> {
    instance: &'a TaskInstance,
    frames: &'a [Frame],
    t: usize,
    max_memory: usize,
    memo: Vec<Option<Value>>,
    probe: P,
}

impl<'a> Interpreter<'a, NoProbe> {
    pub fn new(instance: &'a TaskInstance, frames: &'a [Frame], t: usize, max_memory: usize) -> Self {
        Interpreter::with_probe(instance, frames, t, max_memory, NoProbe)
    }
}

impl<'a, P: Probe> Interpreter<'a, P> {
    pub fn with_probe(instance: &'a TaskInstance, frames: &'a [Frame], t: usize, max_memory: usize, probe: P) -> Self {
        assert!(t < frames.len(), "frame {t} outside history of {}", frames.len());
        Interpreter {
            instance,
            frames,
            t,
            max_memory,
            memo: vec![None; instance.graph.len()],
            probe,
        }
    }

    pub fn root_value(&mut self) -> Value {
        self.value(self.instance.graph.root())
    }

    /// Values of all nodes evaluated so far.
    pub fn memo(&self) -> &[Option<Value>] {
        &self.memo
    }

    pub fn into_probe(self) -> P {
        self.probe
    }

    pub fn value(&mut self, id: NodeId) -> Value {
        if let Some(v) = &self.memo[id] {
            return v.clone();
        }
        let v = self.compute(id);
        self.probe.node_evaluated(id);
        self.memo[id] = Some(v.clone());
        v
    }

    /// Resolves a `Select`'s parameters, pulling wired ones from upstream.
    /// `None` if a wired input is invalid.
    pub fn resolve_select(&mut self, id: NodeId, p: &SelectParams) -> Option<SelectDesc> {
        let node = self.instance.graph.node(id);
        let mut desc = self.instance.select_desc(p);
        if matches!(p.color, AttrParam::Wired) {
            match self.value(node.input(Port::Color).unwrap()) {
                Value::Color(c) => desc.color = Some(c),
                _ => return None,
            }
        }
        if matches!(p.shape, AttrParam::Wired) {
            match self.value(node.input(Port::Shape).unwrap()) {
                Value::Shape(s) => desc.shape = Some(s),
                _ => return None,
            }
        }
        if let Some(sp) = &p.space {
            if matches!(sp.anchor, AnchorParam::Wired) {
                match self.value(node.input(Port::Anchor).unwrap()) {
                    Value::Loc(l) => desc.space = Some(SpatialRange::new(self.instance.relation(&sp.relation), l)),
                    _ => return None,
                }
            }
        }
        Some(desc)
    }

    fn single(&mut self, id: NodeId) -> Option<&'a SceneObject> {
        let src = self.instance.graph.node(id).input(Port::Objects).unwrap();
        match self.value(src) {
            Value::Objects(set) if set.len() == 1 => Some(set[0].get(self.frames)),
            _ => None,
        }
    }

    fn compute(&mut self, id: NodeId) -> Value {
        let instance = self.instance;
        let node = instance.graph.node(id);
        match &node.op {
            Operator::Select(p) => match self.resolve_select(id, p) {
                Some(desc) => select_objects(&desc, self.frames, self.t, self.max_memory, &mut self.probe),
                None => Value::Invalid,
            },
            Operator::GetColor => self.single(id).map_or(Value::Invalid, |o| Value::Color(o.color)),
            Operator::GetShape => self.single(id).map_or(Value::Invalid, |o| Value::Shape(o.shape)),
            Operator::GetLoc => self.single(id).map_or(Value::Invalid, |o| Value::Loc(o.loc)),
            Operator::Exist => match self.value(node.input(Port::Objects).unwrap()) {
                Value::Objects(set) => Value::Bool(!set.is_empty()),
                _ => Value::Invalid,
            },
            Operator::Equal { literal } => {
                let left = self.value(node.input(Port::Left).unwrap());
                let right = match literal {
                    Some(lit) => match instance.literal(lit) {
                        Binding::Color(c) => Value::Color(c),
                        Binding::Shape(s) => Value::Shape(s),
                        _ => unreachable!(),
                    },
                    None => self.value(node.input(Port::Right).unwrap()),
                };
                match (left, right) {
                    (Value::Color(a), Value::Color(b)) => Value::Bool(a == b),
                    (Value::Shape(a), Value::Shape(b)) => Value::Bool(a == b),
                    _ => Value::Invalid,
                }
            }
            Operator::And => {
                let left = self.value(node.input(Port::Left).unwrap());
                let right = self.value(node.input(Port::Right).unwrap());
                match (left, right) {
                    (Value::Bool(a), Value::Bool(b)) => Value::Bool(a && b),
                    _ => Value::Invalid,
                }
            }
            Operator::Switch => match self.value(node.input(Port::Cond).unwrap()) {
                Value::Bool(true) => self.value(node.input(Port::Then).unwrap()),
                Value::Bool(false) => self.value(node.input(Port::Else).unwrap()),
                _ => Value::Invalid,
            },
        }
    }
}

/// Target response of `instance` at frame `t` of `frames`.
pub fn evaluate(instance: &TaskInstance, frames: &[Frame], t: usize, max_memory: usize) -> ResponseValue {
    Interpreter::new(instance, frames, t, max_memory)
        .root_value()
        .into_response()
}

/// Target responses for every frame.
pub fn evaluate_all(instance: &TaskInstance, frames: &[Frame], max_memory: usize) -> Vec<ResponseValue> {
    (0..frames.len())
        .map(|t| evaluate(instance, frames, t, max_memory))
        .collect()
}
