//! The backward pass: frames newest to oldest, nodes root to leaves.
//!
//! Each frame gets a planned root target. Walking the graph in reverse
//! topological order turns it into targets for every node on the active path
//! and, at `Select` nodes, into objects found in or added to the scene. After
//! a frame is filled, the forward interpreter must reproduce its plan and must
//! not have changed any newer frame; otherwise the frame is refilled from a
//! snapshot. A plan that cannot be realized is resampled, which keeps target
//! sequences that are impossible under the temporal semantics (for example
//! "false" right after "true" for `exist latest`) from skewing the answers.

use rand::Rng;

use crate::attr::{Color, Location, Shape, SpatialRange, TimeRef};
use crate::error::GenerateError;
use crate::graph::{AnchorParam, AttrParam, NodeId, Operator, Port, SelectParams, TaskGraph, ValueType};
use crate::instance::{Binding, SelectDesc, TaskInstance, ANCHOR_RANGE};
use crate::interp::{evaluate, select_objects, time_window, Interpreter, NoProbe, Value};
use crate::response::{OutputSpace, ResponseValue};
use crate::rng::{between, choose, coin, pick, uniform};
use crate::scene::{Frame, Provenance, SceneObject};

use super::place::{full_region, is_free, region_of, sample_free};
use super::{GenerationConfig, GenerationTrace, MemoryEvent, NearMissEvent, EPISODE_RETRIES};

/// Fill attempts per frame before the realization is abandoned.
const FRAME_RETRIES: usize = 4;
/// Realizations tried per target plan.
const REALIZATIONS: usize = 8;

/// Planned root answer for one frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Planned {
    Bool(bool),
    Color(Color),
    Shape(Shape),
    /// Any valid location; the placed object decides where.
    AnyLoc,
}

impl Planned {
    fn admits(&self, r: &ResponseValue) -> bool {
        match (self, r) {
            (Planned::Bool(b), ResponseValue::Bool(v)) => b == v,
            (Planned::Color(c), ResponseValue::Verbal(w)) => c.word() == w,
            (Planned::Shape(s), ResponseValue::Verbal(w)) => s.word() == w,
            (Planned::AnyLoc, ResponseValue::Point(_)) => true,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FramePlan {
    pub root: Planned,
    /// Branch taken by the root `Switch`, if there is one.
    pub branch: Option<bool>,
    /// Planned values of internal boolean nodes: the `Switch` condition and
    /// the inputs of every `And` below a planned boolean.
    pub bools: Vec<(NodeId, bool)>,
}

impl FramePlan {
    fn planned_bool(&self, id: NodeId) -> Option<bool> {
        self.bools.iter().find(|(n, _)| *n == id).map(|(_, b)| *b)
    }
}

/// Splits planned `And` outputs down to their inputs.
fn plan_bools<R: Rng + ?Sized>(graph: &TaskGraph, id: NodeId, b: bool, rng: &mut R, out: &mut Vec<(NodeId, bool)>) {
    let node = graph.node(id);
    if let Operator::And = node.op {
        let (l, r) = if b { (true, true) } else { and_false_split(rng) };
        for (port, v) in [(Port::Left, l), (Port::Right, r)] {
            let input = node.input(port).unwrap();
            out.push((input, v));
            plan_bools(graph, input, v, rng, out);
        }
    }
}

/// Nodes whose values a realized frame must keep once checked: the root,
/// every `And` input and every `Switch` condition.
pub(crate) fn guarded_nodes(graph: &TaskGraph) -> Vec<NodeId> {
    let mut out = vec![graph.root()];
    for &id in graph.topo_order() {
        let node = graph.node(id);
        let ports: &[Port] = match node.op {
            Operator::And => &[Port::Left, Port::Right],
            Operator::Switch => &[Port::Cond],
            _ => &[],
        };
        out.extend(ports.iter().filter_map(|&p| node.input(p)));
    }
    out
}

fn guarded_values(
    instance: &TaskInstance,
    frames: &[Frame],
    t: usize,
    max_memory: usize,
    nodes: &[NodeId],
) -> Vec<Value> {
    let mut it = Interpreter::new(instance, frames, t, max_memory);
    nodes.iter().map(|&id| it.value(id)).collect()
}

fn plan_in<R: Rng + ?Sized>(space: &OutputSpace, rng: &mut R) -> Planned {
    match space {
        OutputSpace::Bool => Planned::Bool(coin(rng, 0.5)),
        OutputSpace::Colors => Planned::Color(*choose(rng, Color::ALL)),
        OutputSpace::Shapes => Planned::Shape(*choose(rng, Shape::ALL)),
        OutputSpace::Pointing => Planned::AnyLoc,
        OutputSpace::Switch { .. } => unreachable!("Switch only appears at the root"),
    }
}

/// Draws one frame's root target uniformly from the allowable outputs. For a
/// `Switch` root the branch is drawn first, then a value of that branch.
pub fn sample_plan<R: Rng + ?Sized>(graph: &TaskGraph, rng: &mut R) -> FramePlan {
    let root = graph.node(graph.root());
    let mut bools = Vec::new();
    if let Operator::Switch = root.op {
        let branch = coin(rng, 0.5);
        let cond = root.input(Port::Cond).unwrap();
        bools.push((cond, branch));
        plan_bools(graph, cond, branch, rng, &mut bools);
        let taken = root.input(if branch { Port::Then } else { Port::Else }).unwrap();
        let planned = plan_in(&graph.output_space_of(taken), rng);
        if let Planned::Bool(b) = planned {
            plan_bools(graph, taken, b, rng, &mut bools);
        }
        FramePlan {
            root: planned,
            branch: Some(branch),
            bools,
        }
    } else {
        let planned = plan_in(&graph.output_space_of(graph.root()), rng);
        if let Planned::Bool(b) = planned {
            plan_bools(graph, graph.root(), b, rng, &mut bools);
        }
        FramePlan {
            root: planned,
            branch: None,
            bools,
        }
    }
}

/// A uniform draw from the instance's allowable outputs; locations are
/// uniform over the anchor square.
pub fn sample_target<R: Rng + ?Sized>(instance: &TaskInstance, rng: &mut R) -> ResponseValue {
    match sample_plan(&instance.graph, rng).root {
        Planned::Bool(b) => ResponseValue::Bool(b),
        Planned::Color(c) => ResponseValue::color(c),
        Planned::Shape(s) => ResponseValue::shape(s),
        Planned::AnyLoc => {
            let (lo, hi) = ANCHOR_RANGE;
            let x = uniform(rng, lo, hi);
            let y = uniform(rng, lo, hi);
            ResponseValue::Point(Location::new(x, y))
        }
    }
}

/// Input targets for `And` when its output must be false: (T,F), (F,T) and
/// (F,F) with probabilities `2√½−1`, `2√½−1` and `3−4√½`. Combined with a
/// true output (both inputs true) at rate ½, each input is true with
/// probability √½ independently of the other.
pub fn and_false_split<R: Rng + ?Sized>(rng: &mut R) -> (bool, bool) {
    let p = 2.0 * 0.5f64.sqrt() - 1.0;
    let u: f64 = rng.random();
    if u < p {
        (true, false)
    } else if u < 2.0 * p {
        (false, true)
    } else {
        (false, false)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Spec {
    color: Option<Color>,
    shape: Option<Shape>,
    loc: Option<Location>,
}

impl Spec {
    fn admits(&self, o: &SceneObject) -> bool {
        self.color.is_none_or(|c| c == o.color)
            && self.shape.is_none_or(|s| s == o.shape)
            && self.loc.is_none_or(|l| l == o.loc)
    }
}

/// What a node's output must be in the frame being filled.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Target {
    Empty,
    NonEmpty,
    One(Spec),
    Color(Color),
    Shape(Shape),
    Loc(Option<Location>),
    Bool(bool),
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Fail {
    Conflict,
    Placement { frame: usize },
}

fn merge_opt<T: PartialEq + Copy>(a: Option<T>, b: Option<T>) -> Result<Option<T>, Fail> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(Fail::Conflict),
        (x, y) => Ok(x.or(y)),
    }
}

fn merge(a: Target, b: Target) -> Result<Target, Fail> {
    use Target::*;
    Ok(match (a, b) {
        (Empty, Empty) => Empty,
        (NonEmpty, NonEmpty) => NonEmpty,
        (NonEmpty, One(s)) | (One(s), NonEmpty) => One(s),
        (One(x), One(y)) => One(Spec {
            color: merge_opt(x.color, y.color)?,
            shape: merge_opt(x.shape, y.shape)?,
            loc: merge_opt(x.loc, y.loc)?,
        }),
        (Color(x), Color(y)) if x == y => Color(x),
        (Shape(x), Shape(y)) if x == y => Shape(x),
        (Loc(x), Loc(y)) => Loc(merge_opt(x, y)?),
        (Bool(x), Bool(y)) if x == y => Bool(x),
        _ => return Err(Fail::Conflict),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Attr {
    Color(Color),
    Shape(Shape),
}

impl Attr {
    fn of(v: &Value) -> Option<Attr> {
        match v {
            Value::Color(c) => Some(Attr::Color(*c)),
            Value::Shape(s) => Some(Attr::Shape(*s)),
            _ => None,
        }
    }

    fn target(self) -> Target {
        match self {
            Attr::Color(c) => Target::Color(c),
            Attr::Shape(s) => Target::Shape(s),
        }
    }
}

fn other_than<T: Copy, R: Rng + ?Sized>(rng: &mut R, all: &[T], skip: usize) -> T {
    let i = pick(rng, all.len() - 1);
    all[if i >= skip { i + 1 } else { i }]
}

fn draw_attr<R: Rng + ?Sized>(rng: &mut R, kind: ValueType) -> Attr {
    match kind {
        ValueType::Color => Attr::Color(*choose(rng, Color::ALL)),
        ValueType::Shape => Attr::Shape(*choose(rng, Shape::ALL)),
        other => unreachable!("Equal over {other:?}"),
    }
}

fn draw_attr_except<R: Rng + ?Sized>(rng: &mut R, x: Attr) -> Attr {
    match x {
        Attr::Color(c) => Attr::Color(other_than(rng, Color::ALL, c.index())),
        Attr::Shape(s) => Attr::Shape(other_than(rng, Shape::ALL, s.index())),
    }
}

struct Filler<'a, 'r, R: Rng + ?Sized> {
    inst: &'a TaskInstance,
    graph: &'a TaskGraph,
    max_memory: usize,
    plans: &'a [FramePlan],
    frames: Vec<Frame>,
    /// Anchor locations promised to objects not yet placed.
    reserved: Vec<(usize, Location)>,
    rng: &'r mut R,
    strict: bool,
    memory: Vec<MemoryEvent>,
    near: Vec<NearMissEvent>,
    guarded: Vec<NodeId>,
}

impl<R: Rng + ?Sized> Filler<'_, '_, R> {
    fn eval_node(&self, t: usize, id: NodeId) -> Value {
        Interpreter::new(self.inst, &self.frames, t, self.max_memory).value(id)
    }

    fn eval_root(&self, t: usize) -> ResponseValue {
        evaluate(self.inst, &self.frames, t, self.max_memory)
    }

    fn reserved_at(&self, f: usize, except: Option<Location>) -> Vec<Location> {
        self.reserved
            .iter()
            .filter(|(rf, l)| *rf == f && Some(*l) != except)
            .map(|(_, l)| *l)
            .collect()
    }

    fn assign(&self, targets: &mut [Option<Target>], id: NodeId, t: Target) -> Result<(), Fail> {
        targets[id] = Some(match targets[id] {
            Some(prev) => merge(prev, t)?,
            None => t,
        });
        Ok(())
    }

    /// Fills frame `t`. Returns `true` if the frame cannot be answered (a
    /// `last` query with no earlier frame in reach).
    fn fill_frame(&mut self, t: usize) -> Result<bool, Fail> {
        let graph = self.graph;
        let plan = &self.plans[t];
        let mut targets: Vec<Option<Target>> = vec![None; graph.len()];
        targets[graph.root()] = Some(match plan.root {
            Planned::Bool(b) => Target::Bool(b),
            Planned::Color(c) => Target::Color(c),
            Planned::Shape(s) => Target::Shape(s),
            Planned::AnyLoc => Target::Loc(None),
        });
        self.reserved.clear();
        let mut unanswerable = false;
        for &id in graph.topo_order().iter().rev() {
            let Some(target) = targets[id].take() else { continue };
            match self.fill_node(t, id, target, plan, &mut targets, &mut unanswerable) {
                Err(e) if self.strict => return Err(e),
                _ => {}
            }
        }
        Ok(unanswerable)
    }

    fn fill_node(
        &mut self,
        t: usize,
        id: NodeId,
        target: Target,
        plan: &FramePlan,
        targets: &mut [Option<Target>],
        unanswerable: &mut bool,
    ) -> Result<(), Fail> {
        let node = self.graph.node(id);
        let input = |p: Port| node.input(p).unwrap();
        match (&node.op, target) {
            (Operator::GetColor, Target::Color(c)) => self.assign(
                targets,
                input(Port::Objects),
                Target::One(Spec {
                    color: Some(c),
                    ..Spec::default()
                }),
            ),
            (Operator::GetShape, Target::Shape(s)) => self.assign(
                targets,
                input(Port::Objects),
                Target::One(Spec {
                    shape: Some(s),
                    ..Spec::default()
                }),
            ),
            (Operator::GetLoc, Target::Loc(l)) => self.assign(
                targets,
                input(Port::Objects),
                Target::One(Spec {
                    loc: l,
                    ..Spec::default()
                }),
            ),
            (Operator::Exist, Target::Bool(b)) => self.assign(
                targets,
                input(Port::Objects),
                if b { Target::NonEmpty } else { Target::Empty },
            ),
            (Operator::And, Target::Bool(b)) => {
                let (left, right) = (input(Port::Left), input(Port::Right));
                let (l, r) = match (plan.planned_bool(left), plan.planned_bool(right)) {
                    (Some(l), Some(r)) if (l && r) == b => (l, r),
                    _ if b => (true, true),
                    _ => and_false_split(self.rng),
                };
                self.assign(targets, input(Port::Left), Target::Bool(l))?;
                self.assign(targets, input(Port::Right), Target::Bool(r))
            }
            (Operator::Equal { literal }, Target::Bool(b)) => {
                let left = input(Port::Left);
                let cur_left = Attr::of(&self.eval_node(t, left));
                match literal {
                    Some(lit) => {
                        let lit = match self.inst.literal(lit) {
                            Binding::Color(c) => Attr::Color(c),
                            Binding::Shape(s) => Attr::Shape(s),
                            _ => unreachable!(),
                        };
                        let v = if b {
                            lit
                        } else {
                            match cur_left {
                                Some(x) if x != lit => x,
                                _ => draw_attr_except(self.rng, lit),
                            }
                        };
                        self.assign(targets, left, v.target())
                    }
                    None => {
                        let right = input(Port::Right);
                        let kind = self.graph.output_type(left);
                        let cur_right = Attr::of(&self.eval_node(t, right));
                        let (l, r) = if b {
                            let x = match cur_left.or(cur_right) {
                                Some(x) => x,
                                None => draw_attr(self.rng, kind),
                            };
                            (x, x)
                        } else {
                            let l = match cur_left {
                                Some(x) => x,
                                None => draw_attr(self.rng, kind),
                            };
                            let r = match cur_right {
                                Some(y) if y != l => y,
                                _ => draw_attr_except(self.rng, l),
                            };
                            (l, r)
                        };
                        self.assign(targets, left, l.target())?;
                        self.assign(targets, right, r.target())
                    }
                }
            }
            (Operator::Switch, target) => {
                let branch = plan.branch.expect("Switch root has a planned branch");
                self.assign(targets, input(Port::Cond), Target::Bool(branch))?;
                let taken = input(if branch { Port::Then } else { Port::Else });
                self.assign(targets, taken, target)
            }
            (Operator::Select(p), target) => self.fill_select(t, id, p, target, targets, unanswerable),
            (op, target) => unreachable!("{} cannot produce {target:?}", op.kind_name()),
        }
    }

    fn fill_select(
        &mut self,
        t: usize,
        id: NodeId,
        p: &SelectParams,
        target: Target,
        targets: &mut [Option<Target>],
        unanswerable: &mut bool,
    ) -> Result<(), Fail> {
        let node = self.graph.node(id);
        let spec = match target {
            Target::One(s) => s,
            _ => Spec::default(),
        };
        let mut desc = self.inst.select_desc(p);

        // Wired parameters follow what upstream already yields when it can,
        // so the choice stays consistent with objects placed for newer frames.
        if matches!(p.color, AttrParam::Wired) {
            let up = node.input(Port::Color).unwrap();
            let c = match self.eval_node(t, up) {
                Value::Color(c) => c,
                _ => match spec.color {
                    Some(c) => c,
                    None => *choose(self.rng, Color::ALL),
                },
            };
            self.assign(targets, up, Target::Color(c))?;
            desc.color = Some(c);
        }
        if matches!(p.shape, AttrParam::Wired) {
            let up = node.input(Port::Shape).unwrap();
            let s = match self.eval_node(t, up) {
                Value::Shape(s) => s,
                _ => match spec.shape {
                    Some(s) => s,
                    None => *choose(self.rng, Shape::ALL),
                },
            };
            self.assign(targets, up, Target::Shape(s))?;
            desc.shape = Some(s);
        }
        if let Some(sp) = &p.space {
            if matches!(sp.anchor, AnchorParam::Wired) {
                let up = node.input(Port::Anchor).unwrap();
                let l = match self.eval_node(t, up) {
                    Value::Loc(l) => l,
                    _ => {
                        let (lo, hi) = ANCHOR_RANGE;
                        let res = self.reserved_at(t, None);
                        let l = sample_free(self.rng, &self.frames[t], &res, (lo, hi, lo, hi), |_| true)
                            .ok_or(Fail::Placement { frame: t })?;
                        self.reserved.push((t, l));
                        l
                    }
                };
                self.assign(targets, up, Target::Loc(Some(l)))?;
                desc.space = Some(SpatialRange::new(self.inst.relation(&sp.relation), l));
            }
        }

        let Some(window) = time_window(desc.time, t, self.max_memory) else {
            *unanswerable = true;
            return Ok(());
        };
        let Value::Objects(current) = select_objects(&desc, &self.frames, t, self.max_memory, &mut NoProbe) else {
            unreachable!()
        };
        match target {
            Target::NonEmpty => match current.first() {
                Some(r) => {
                    self.memory.push(MemoryEvent {
                        query_frame: t,
                        object_frame: r.frame,
                        placed: false,
                    });
                    Ok(())
                }
                None => self.place(t, &desc, Spec::default(), window.collect()),
            },
            Target::One(spec) => {
                if current.len() == 1 && spec.admits(current[0].get(&self.frames)) {
                    self.memory.push(MemoryEvent {
                        query_frame: t,
                        object_frame: current[0].frame,
                        placed: false,
                    });
                    return Ok(());
                }
                // A newer match overrides the current ones under the
                // most-recent-frame rule.
                let after = current.first().map(|r| r.frame);
                let candidates: Vec<usize> = window.filter(|&f| after.is_none_or(|a| f > a)).collect();
                if candidates.is_empty() {
                    return Err(Fail::Conflict);
                }
                self.place(t, &desc, spec, candidates)
            }
            Target::Empty => {
                if !current.is_empty() {
                    return Err(Fail::Conflict);
                }
                self.near_miss(t, &desc, window.collect());
                Ok(())
            }
            other => unreachable!("Select cannot produce {other:?}"),
        }
    }

    /// Adds one object matching `desc` and `spec` in one of `candidates`.
    fn place(&mut self, t: usize, desc: &SelectDesc, spec: Spec, mut candidates: Vec<usize>) -> Result<(), Fail> {
        let color = match merge_opt(desc.color, spec.color)? {
            Some(c) => c,
            None => *choose(self.rng, Color::ALL),
        };
        let shape = match merge_opt(desc.shape, spec.shape)? {
            Some(s) => s,
            None => *choose(self.rng, Shape::ALL),
        };
        if let (Some(l), Some(r)) = (spec.loc, desc.space) {
            if !r.contains(&l) {
                return Err(Fail::Conflict);
            }
        }
        // Random order, so the memory gap is uniform over the window unless
        // the look-ahead rules a frame out.
        for i in (1..candidates.len()).rev() {
            let j = pick(self.rng, i + 1);
            candidates.swap(i, j);
        }
        let mut fallback = None;
        for f in candidates {
            let res = self.reserved_at(f, spec.loc);
            let loc = match spec.loc {
                Some(l) => is_free(&self.frames[f], &res, &l).then_some(l),
                None => sample_free(self.rng, &self.frames[f], &res, region_of(desc.space.as_ref()), |l| {
                    desc.space.is_none_or(|r| r.contains(l))
                }),
            };
            let Some(loc) = loc else { continue };
            let obj = SceneObject::new(color, shape, loc, f);
            if f < t && self.contradicts_plans(f, t, &obj) {
                fallback.get_or_insert((f, obj));
                continue;
            }
            self.commit(t, f, obj);
            return Ok(());
        }
        match fallback {
            Some((f, obj)) => {
                self.commit(t, f, obj);
                Ok(())
            }
            None => Err(Fail::Placement { frame: t }),
        }
    }

    fn commit(&mut self, t: usize, f: usize, obj: SceneObject) {
        if let Some(l) = self.reserved.iter().position(|(rf, l)| *rf == f && *l == obj.loc) {
            self.reserved.swap_remove(l);
        }
        self.frames[f].push(obj);
        self.memory.push(MemoryEvent {
            query_frame: t,
            object_frame: f,
            placed: true,
        });
    }

    /// Would putting `obj` into frame `f` already give a wrong answer at one
    /// of the frames `f..t` that are still to be filled?
    fn contradicts_plans(&mut self, f: usize, t: usize, obj: &SceneObject) -> bool {
        self.frames[f].push(obj.clone());
        let bad = (f..t).any(|u| self.violates(u));
        self.frames[f].objects.pop();
        bad
    }

    /// Adds an object differing from `desc` in exactly one of its present
    /// dimensions. Best effort: nothing is added if no location is free.
    fn near_miss(&mut self, t: usize, desc: &SelectDesc, window: Vec<usize>) {
        #[derive(Clone, Copy, PartialEq)]
        enum Dim {
            Color,
            Shape,
            Space,
        }
        let mut dims = Vec::with_capacity(3);
        if desc.color.is_some() {
            dims.push(Dim::Color);
        }
        if desc.shape.is_some() {
            dims.push(Dim::Shape);
        }
        if desc.space.is_some() {
            dims.push(Dim::Space);
        }
        if dims.is_empty() {
            return;
        }
        let dim = *choose(self.rng, &dims);
        let f = match desc.time {
            TimeRef::Last => *choose(self.rng, &window),
            TimeRef::Now | TimeRef::Latest => t,
        };
        let color = match desc.color {
            Some(c) if dim == Dim::Color => other_than(self.rng, Color::ALL, c.index()),
            Some(c) => c,
            None => *choose(self.rng, Color::ALL),
        };
        let shape = match desc.shape {
            Some(s) if dim == Dim::Shape => other_than(self.rng, Shape::ALL, s.index()),
            Some(s) => s,
            None => *choose(self.rng, Shape::ALL),
        };
        let range = desc.space.map(|r| if dim == Dim::Space { r.opposite() } else { r });
        let res = self.reserved_at(f, None);
        let region = range.as_ref().map_or_else(full_region, |r| region_of(Some(r)));
        let Some(loc) = sample_free(self.rng, &self.frames[f], &res, region, |l| {
            range.is_none_or(|r| r.contains(l))
        }) else {
            return;
        };
        let obj = SceneObject::new(color, shape, loc, f).with_provenance(Provenance::NearMiss);
        self.frames[f].push(obj.clone());
        self.near.push(NearMissEvent {
            desc: desc.clone(),
            object: obj,
        });
    }

    /// Does frame `u`, answering `root`, follow its plan, internal booleans
    /// included?
    fn holds(&self, u: usize, root: &ResponseValue) -> bool {
        let plan = &self.plans[u];
        if !plan.root.admits(root) {
            return false;
        }
        let mut it = Interpreter::new(self.inst, &self.frames, u, self.max_memory);
        plan.bools.iter().all(|&(id, b)| it.value(id) == Value::Bool(b))
    }

    /// Does frame `u` already contradict its plan? Values still invalid
    /// may change as older frames fill, so only wrong valid values count.
    fn violates(&self, u: usize) -> bool {
        let plan = &self.plans[u];
        let mut it = Interpreter::new(self.inst, &self.frames, u, self.max_memory);
        let root = it.root_value();
        if !root.is_invalid() && !plan.root.admits(&root.into_response()) {
            return true;
        }
        plan.bools.iter().any(|&(id, b)| it.value(id) == Value::Bool(!b))
    }

    /// Frame `t` must answer its plan (unless unanswerable) and every newer
    /// frame must keep the guarded values it had.
    fn check(&self, t: usize, unanswerable: bool, recorded: &mut [Option<Vec<Value>>]) -> Result<(), Fail> {
        let actual = self.eval_root(t);
        if !unanswerable && !self.holds(t, &actual) {
            return Err(Fail::Conflict);
        }
        for (u, rec) in recorded.iter().enumerate().skip(t + 1) {
            if rec.as_ref()
                != Some(&guarded_values(
                    self.inst,
                    &self.frames,
                    u,
                    self.max_memory,
                    &self.guarded,
                ))
            {
                return Err(Fail::Conflict);
            }
        }
        recorded[t] = Some(guarded_values(
            self.inst,
            &self.frames,
            t,
            self.max_memory,
            &self.guarded,
        ));
        Ok(())
    }
}

struct Realization {
    frames: Vec<Frame>,
    memory: Vec<MemoryEvent>,
    near: Vec<NearMissEvent>,
}

fn realize<R: Rng + ?Sized>(
    inst: &TaskInstance,
    config: &GenerationConfig,
    plans: &[FramePlan],
    rng: &mut R,
    strict: bool,
) -> Result<Realization, Fail> {
    let mut filler = Filler {
        inst,
        graph: &inst.graph,
        max_memory: config.max_memory,
        plans,
        frames: Frame::sequence(config.frames),
        reserved: Vec::new(),
        rng,
        strict,
        memory: Vec::new(),
        near: Vec::new(),
        guarded: guarded_nodes(&inst.graph),
    };
    let mut recorded = vec![None; config.frames];
    for t in (0..config.frames).rev() {
        if !strict {
            let _ = filler.fill_frame(t);
            continue;
        }
        let snapshot = (filler.frames.clone(), filler.memory.len(), filler.near.len());
        let mut last = Fail::Conflict;
        let mut done = false;
        for _ in 0..FRAME_RETRIES {
            match filler
                .fill_frame(t)
                .and_then(|unanswerable| filler.check(t, unanswerable, &mut recorded))
            {
                Ok(()) => {
                    done = true;
                    break;
                }
                Err(e) => {
                    last = e;
                    filler.frames.clone_from(&snapshot.0);
                    filler.memory.truncate(snapshot.1);
                    filler.near.truncate(snapshot.2);
                }
            }
        }
        if !done {
            return Err(last);
        }
    }
    Ok(Realization {
        frames: filler.frames,
        memory: filler.memory,
        near: filler.near,
    })
}

/// Builds the frames of a backward-generated episode, distractors included.
pub fn generate_backward<R: Rng + ?Sized>(
    instance: &TaskInstance,
    config: &GenerationConfig,
    rng: &mut R,
    trace: &mut GenerationTrace,
) -> Result<Vec<Frame>, GenerateError> {
    config.validate()?;
    let plan_all =
        |rng: &mut R| -> Vec<FramePlan> { (0..config.frames).map(|_| sample_plan(&instance.graph, rng)).collect() };
    let mut found = None;
    'plans: for _ in 0..EPISODE_RETRIES {
        let plans = plan_all(rng);
        trace.plans += 1;
        for _ in 0..REALIZATIONS {
            trace.attempts += 1;
            if let Ok(r) = realize(instance, config, &plans, rng, true) {
                found = Some(r);
                break 'plans;
            }
        }
    }
    let r = match found {
        Some(r) => r,
        None => {
            // Targets no plan could reach (say, an instance whose two
            // compared selections always pick the same object). Fill without
            // conflict checks; the recorded targets are the interpreter's.
            trace.relaxed = true;
            let plans = plan_all(rng);
            realize(instance, config, &plans, rng, false).expect("relaxed fill never fails")
        }
    };
    let mut frames = r.frames;
    trace.memory.extend(r.memory);
    trace.near_misses.extend(r.near);
    add_distractors(instance, &mut frames, config, rng, trace);
    Ok(frames)
}

/// Adds up to `D ~ U(1, D_max)` random objects per frame, removing each one
/// that changes any frame's answer, `And` inputs or `Switch` conditions.
pub fn add_distractors<R: Rng + ?Sized>(
    instance: &TaskInstance,
    frames: &mut [Frame],
    config: &GenerationConfig,
    rng: &mut R,
    trace: &mut GenerationTrace,
) {
    if config.max_distractors == 0 {
        return;
    }
    let m = config.max_memory;
    let guarded = guarded_nodes(&instance.graph);
    let values = |frames: &[Frame], u: usize| guarded_values(instance, frames, u, m, &guarded);
    let recorded: Vec<Vec<Value>> = (0..frames.len()).map(|t| values(frames, t)).collect();
    for t in 0..frames.len() {
        let d = between(rng, 1, config.max_distractors);
        for _ in 0..d {
            let color = *choose(rng, Color::ALL);
            let shape = *choose(rng, Shape::ALL);
            let Some(loc) = sample_free(rng, &frames[t], &[], full_region(), |_| true) else {
                continue;
            };
            trace.distractors_tried += 1;
            frames[t].push(SceneObject::new(color, shape, loc, t).with_provenance(Provenance::Distractor));
            // Frames before t never look at frame t.
            if (t..frames.len()).any(|u| values(frames, u) != recorded[u]) {
                frames[t].objects.pop();
                trace.distractors_removed += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::catalog::Catalog;
    use crate::graph::build_graph;
    use crate::instance::instantiate;
    use crate::interp::evaluate_all;
    use crate::rng::derive_rng;
    use crate::taskfile::parse_graph;

    fn inst(text: &str, bindings: Vec<Binding>) -> TaskInstance {
        let g = Arc::new(build_graph(&parse_graph(text).unwrap()).unwrap());
        TaskInstance::new("t", g, bindings).unwrap()
    }

    #[test]
    fn and_true_passes_true_down() {
        let i = inst(
            "node a Select color=red time=now\nnode b Select color=blue time=now\n\
             node ea Exist\nnode eb Exist\nnode x And\n\
             edge a -> ea objects\nedge b -> eb objects\nedge ea -> x left\nedge eb -> x right\nroot x\n",
            vec![],
        );
        let plans = [FramePlan {
            root: Planned::Bool(true),
            branch: None,
            bools: vec![],
        }];
        let config = GenerationConfig {
            frames: 1,
            ..GenerationConfig::canonical(0)
        };
        let r = realize(&i, &config, &plans, &mut derive_rng(0, 0), true).unwrap();
        let colors: Vec<Color> = r.frames[0].objects.iter().map(|o| o.color).collect();
        assert!(colors.contains(&Color::Red) && colors.contains(&Color::Blue));
    }

    #[test]
    fn empty_target_gets_a_one_attribute_near_miss() {
        let i = inst(
            "node s Select color=red shape=circle time=now\nnode e Exist\nedge s -> e objects\nroot e\n",
            vec![],
        );
        let config = GenerationConfig {
            frames: 1,
            max_distractors: 0,
            ..GenerationConfig::canonical(0)
        };
        let plans = [FramePlan {
            root: Planned::Bool(false),
            branch: None,
            bools: vec![],
        }];
        let mut rng = derive_rng(5, 0);
        let (mut red, mut circle) = (0, 0);
        for _ in 0..200 {
            let r = realize(&i, &config, &plans, &mut rng, true).unwrap();
            let o = &r.frames[0].objects[0];
            assert_ne!((o.color == Color::Red), (o.shape == Shape::Circle), "{o:?}");
            red += usize::from(o.color == Color::Red);
            circle += usize::from(o.shape == Shape::Circle);
        }
        assert!(red > 50 && circle > 50);
    }

    #[test]
    fn plans_follow_the_root_type() {
        let c = Catalog::builtin();
        let mut rng = derive_rng(1, 1);
        let g = &c.get("GetShape").unwrap().graph;
        assert!(matches!(sample_plan(g, &mut rng).root, Planned::Shape(_)));
        let g = &c.get("ExistGoOrColor").unwrap().graph;
        for _ in 0..50 {
            let p = sample_plan(g, &mut rng);
            match p.branch {
                Some(true) => assert_eq!(p.root, Planned::AnyLoc),
                Some(false) => assert!(matches!(p.root, Planned::Color(_))),
                None => panic!(),
            }
        }
    }

    #[test]
    fn distractors_never_change_answers() {
        let c = Catalog::builtin();
        let task = c.get("ExistColor").unwrap();
        let config = GenerationConfig::hard(3);
        for index in 0..20 {
            let mut rng = derive_rng(3, index);
            let i = instantiate(&task.name, &task.graph, &mut rng);
            let mut trace = GenerationTrace::default();
            let mut frames = generate_backward(&i, &config, &mut rng, &mut trace).unwrap();
            let with = evaluate_all(&i, &frames, config.max_memory);
            for f in frames.iter_mut() {
                f.objects.retain(|o| o.provenance != Provenance::Distractor);
            }
            assert_eq!(with, evaluate_all(&i, &frames, config.max_memory));
        }
    }

    #[test]
    fn no_distractors_when_d_max_is_zero() {
        let c = Catalog::builtin();
        let task = c.get("Go").unwrap();
        let config = GenerationConfig {
            max_distractors: 0,
            ..GenerationConfig::canonical(0)
        };
        let mut rng = derive_rng(0, 0);
        let i = instantiate(&task.name, &task.graph, &mut rng);
        let mut trace = GenerationTrace::default();
        let frames = generate_backward(&i, &config, &mut rng, &mut trace).unwrap();
        assert!(frames
            .iter()
            .flat_map(|f| &f.objects)
            .all(|o| o.provenance != Provenance::Distractor));
        assert_eq!(trace.distractors_tried, 0);
    }

    #[test]
    fn red_distractor_is_removed_when_answer_is_false() {
        let i = inst(
            "node s Select color=red time=now\nnode e Exist\nedge s -> e objects\nroot e\n",
            vec![],
        );
        let config = GenerationConfig {
            frames: 1,
            ..GenerationConfig::canonical(0)
        };
        let mut frames = vec![Frame::new(0)];
        let mut trace = GenerationTrace::default();
        let mut rng = derive_rng(8, 0);
        let mut removed_red = 0;
        for _ in 0..2000 {
            frames[0].objects.clear();
            let before = trace.distractors_removed;
            add_distractors(&i, &mut frames, &config, &mut rng, &mut trace);
            assert_eq!(evaluate(&i, &frames, 0, 3), ResponseValue::Bool(false));
            if trace.distractors_removed > before {
                removed_red += 1;
            }
        }
        // Only red candidates interfere: about 1 in 19.
        assert!(removed_red > 50 && removed_red < 170, "{removed_red}");
    }
}
