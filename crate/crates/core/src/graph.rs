//! Operators and validated task graphs.
//!
//! A graph is built from a [`GraphSpec`], the declarative node/edge listing
//! produced by the task-file parser. Validation checks node count, operator
//! arity, port types, acyclicity, a single root, and the one-`Switch` limit.

use std::collections::BTreeMap;
use std::fmt;

use crate::attr::{Color, Location, Relation, Shape, TimeRef};
use crate::error::GraphError;
use crate::response::OutputSpace;

pub type NodeId = usize;
pub type SlotId = usize;

pub const MIN_NODES: usize = 2;
pub const MAX_NODES: usize = 11;

/// A parameter that is either fixed by the graph or bound at instantiation.
#[derive(Clone, Debug, PartialEq)]
pub enum Slot<T> {
    Fixed(T),
    Free(SlotId),
}

/// Attribute parameter of `Select`.
#[derive(Clone, Debug, PartialEq)]
pub enum AttrParam<T> {
    Absent,
    Given(Slot<T>),
    /// Supplied at run time by an upstream `Get*` operator.
    Wired,
}

impl<T> AttrParam<T> {
    pub fn is_present(&self) -> bool {
        !matches!(self, AttrParam::Absent)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnchorParam {
    Given(Slot<Location>),
    Wired,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpaceParam {
    pub relation: Slot<Relation>,
    pub anchor: AnchorParam,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectParams {
    pub color: AttrParam<Color>,
    pub shape: AttrParam<Shape>,
    pub space: Option<SpaceParam>,
    pub time: Slot<TimeRef>,
}

/// The four `Select` usages, distinguished by which of color and shape are
/// parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectVariant {
    Color,
    Shape,
    ColorShape,
    TimeOnly,
}

impl SelectParams {
    pub fn variant(&self) -> SelectVariant {
        match (self.color.is_present(), self.shape.is_present()) {
            (true, true) => SelectVariant::ColorShape,
            (true, false) => SelectVariant::Color,
            (false, true) => SelectVariant::Shape,
            (false, false) => SelectVariant::TimeOnly,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    Color(Slot<Color>),
    Shape(Slot<Shape>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Operator {
    Select(SelectParams),
    GetColor,
    GetShape,
    GetLoc,
    Exist,
    /// Compares two attributes; with a literal, compares its single input
    /// against the literal.
    Equal {
        literal: Option<Literal>,
    },
    And,
    Switch,
}

impl Operator {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Operator::Select(_) => "Select",
            Operator::GetColor => "GetColor",
            Operator::GetShape => "GetShape",
            Operator::GetLoc => "GetLoc",
            Operator::Exist => "Exist",
            Operator::Equal { .. } => "Equal",
            Operator::And => "And",
            Operator::Switch => "Switch",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Port {
    Objects,
    Color,
    Shape,
    Anchor,
    Left,
    Right,
    Cond,
    Then,
    Else,
}

impl Port {
    pub fn parse(s: &str) -> Option<Port> {
        Some(match s {
            "objects" => Port::Objects,
            "color" => Port::Color,
            "shape" => Port::Shape,
            "anchor" => Port::Anchor,
            "left" => Port::Left,
            "right" => Port::Right,
            "cond" => Port::Cond,
            "then" => Port::Then,
            "else" => Port::Else,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Port::Objects => "objects",
            Port::Color => "color",
            Port::Shape => "shape",
            Port::Anchor => "anchor",
            Port::Left => "left",
            Port::Right => "right",
            Port::Cond => "cond",
            Port::Then => "then",
            Port::Else => "else",
        }
    }
}

/// Static type of an operator output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueType {
    Objects,
    Color,
    Shape,
    Location,
    Bool,
    /// Switch over branches of different types.
    Mixed,
}

/// Attribute space of a free slot.
#[derive(Clone, Debug, PartialEq)]
pub enum SlotKind {
    Color,
    Shape,
    Time(Vec<TimeRef>),
    Relation,
    Anchor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub name: String,
    pub op: Operator,
    pub inputs: Vec<(Port, NodeId)>,
}

impl Node {
    pub fn input(&self, port: Port) -> Option<NodeId> {
        self.inputs.iter().find(|(p, _)| *p == port).map(|(_, n)| *n)
    }
}

/// Declarative description of a graph, before validation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GraphSpec {
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
    pub root: String,
    /// Pairs of free slots, as `node.param`, that must bind different values.
    pub distinct: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeSpec {
    pub id: String,
    pub kind: String,
    pub params: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSpec {
    pub from: String,
    pub to: String,
    pub port: String,
}

/// A validated, immutable task graph.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskGraph {
    nodes: Vec<Node>,
    root: NodeId,
    order: Vec<NodeId>,
    consumers: Vec<Vec<NodeId>>,
    types: Vec<ValueType>,
    slots: Vec<SlotKind>,
    distinct: Vec<(SlotId, SlotId)>,
}

impl TaskGraph {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Topological order, inputs before consumers.
    pub fn topo_order(&self) -> &[NodeId] {
        &self.order
    }

    pub fn consumers(&self, id: NodeId) -> &[NodeId] {
        &self.consumers[id]
    }

    pub fn output_type(&self, id: NodeId) -> ValueType {
        self.types[id]
    }

    pub fn slots(&self) -> &[SlotKind] {
        &self.slots
    }

    /// Slot pairs `(a, b)`, `a < b`, that must bind different values. Each
    /// slot is in at most one pair.
    pub fn distinct_pairs(&self) -> &[(SlotId, SlotId)] {
        &self.distinct
    }

    /// The slot that slot `id` must differ from, if it is the later slot of
    /// a distinct pair.
    pub fn distinct_from(&self, id: SlotId) -> Option<SlotId> {
        self.distinct.iter().find(|(_, b)| *b == id).map(|(a, _)| *a)
    }

    pub fn switch_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n.op, Operator::Switch)).count()
    }

    /// Output domain of node `id`.
    pub fn output_space_of(&self, id: NodeId) -> OutputSpace {
        let node = &self.nodes[id];
        match node.op {
            Operator::Switch => OutputSpace::Switch {
                then: Box::new(self.output_space_of(node.input(Port::Then).unwrap())),
                otherwise: Box::new(self.output_space_of(node.input(Port::Else).unwrap())),
            },
            _ => match self.types[id] {
                ValueType::Color => OutputSpace::Colors,
                ValueType::Shape => OutputSpace::Shapes,
                ValueType::Location => OutputSpace::Pointing,
                ValueType::Bool => OutputSpace::Bool,
                ValueType::Objects | ValueType::Mixed => {
                    unreachable!("validated graphs only expose response types")
                }
            },
        }
    }
}

fn catalog(msg: impl Into<String>) -> GraphError {
    GraphError::Catalog(msg.into())
}

fn arity(node: &str, msg: impl Into<String>) -> GraphError {
    GraphError::Arity {
        node: node.to_string(),
        msg: msg.into(),
    }
}

struct SlotTable {
    kinds: Vec<SlotKind>,
    /// `node.param` name of each slot.
    names: Vec<String>,
    node: String,
}

impl SlotTable {
    fn free(&mut self, param: &str, kind: SlotKind) -> SlotId {
        self.kinds.push(kind);
        self.names.push(format!("{}.{param}", self.node));
        self.kinds.len() - 1
    }
}

fn parse_attr<T: std::str::FromStr<Err = crate::error::ParseError>>(
    param: &str,
    value: &str,
    kind: SlotKind,
    slots: &mut SlotTable,
) -> Result<AttrParam<T>, GraphError> {
    Ok(match value {
        "free" => AttrParam::Given(Slot::Free(slots.free(param, kind))),
        "wired" => AttrParam::Wired,
        word => AttrParam::Given(Slot::Fixed(word.parse()?)),
    })
}

fn parse_time(value: &str, slots: &mut SlotTable) -> Result<Slot<TimeRef>, GraphError> {
    if value == "free" {
        return Ok(Slot::Free(slots.free("time", SlotKind::Time(TimeRef::ALL.to_vec()))));
    }
    if let Some(list) = value.strip_prefix("free:") {
        let allowed = list
            .split(',')
            .map(|w| w.trim().parse::<TimeRef>())
            .collect::<Result<Vec<_>, _>>()?;
        if allowed.is_empty() {
            return Err(catalog("empty time set"));
        }
        return Ok(Slot::Free(slots.free("time", SlotKind::Time(allowed))));
    }
    Ok(Slot::Fixed(value.parse()?))
}

fn parse_location(value: &str) -> Result<Location, GraphError> {
    let (x, y) = value
        .split_once(',')
        .ok_or_else(|| catalog(format!("bad location `{value}`")))?;
    let x: f64 = x.trim().parse().map_err(|_| catalog(format!("bad x `{x}`")))?;
    let y: f64 = y.trim().parse().map_err(|_| catalog(format!("bad y `{y}`")))?;
    let loc = Location::new(x, y);
    if !loc.in_unit_square() {
        return Err(catalog(format!("location `{value}` outside the unit square")));
    }
    Ok(loc)
}

fn parse_space(value: &str, slots: &mut SlotTable) -> Result<SpaceParam, GraphError> {
    let (rel, anchor) = value
        .split_once('@')
        .ok_or_else(|| catalog(format!("space must be `relation@anchor`, got `{value}`")))?;
    let relation = match rel {
        "free" => Slot::Free(slots.free("relation", SlotKind::Relation)),
        word => Slot::Fixed(word.parse()?),
    };
    let anchor = match anchor {
        "free" => AnchorParam::Given(Slot::Free(slots.free("anchor", SlotKind::Anchor))),
        "wired" => AnchorParam::Wired,
        loc => AnchorParam::Given(Slot::Fixed(parse_location(loc)?)),
    };
    Ok(SpaceParam { relation, anchor })
}

fn parse_operator(spec: &NodeSpec, slots: &mut SlotTable) -> Result<Operator, GraphError> {
    let mut params: BTreeMap<&str, &str> = BTreeMap::new();
    for (k, v) in &spec.params {
        if params.insert(k.as_str(), v.as_str()).is_some() {
            return Err(catalog(format!("node `{}`: duplicate param `{k}`", spec.id)));
        }
    }
    let allowed: &[&str] = match spec.kind.as_str() {
        "Select" => &["color", "shape", "space", "time"],
        "Equal" => &["literal"],
        "GetColor" | "GetShape" | "GetLoc" | "Exist" | "And" | "Switch" => &[],
        other => return Err(catalog(format!("unknown operator kind `{other}`"))),
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(k)) {
        return Err(catalog(format!(
            "node `{}`: unknown param `{k}` for {}",
            spec.id, spec.kind
        )));
    }
    Ok(match spec.kind.as_str() {
        "Select" => {
            let color = match params.get("color") {
                Some(v) => parse_attr("color", v, SlotKind::Color, slots)?,
                None => AttrParam::Absent,
            };
            let shape = match params.get("shape") {
                Some(v) => parse_attr("shape", v, SlotKind::Shape, slots)?,
                None => AttrParam::Absent,
            };
            let space = params.get("space").map(|v| parse_space(v, slots)).transpose()?;
            let time = parse_time(params.get("time").copied().unwrap_or("free"), slots)?;
            Operator::Select(SelectParams {
                color,
                shape,
                space,
                time,
            })
        }
        "Equal" => {
            let literal = match params.get("literal") {
                None => None,
                Some(v) => {
                    let (kind, value) = v
                        .split_once(':')
                        .ok_or_else(|| catalog(format!("literal must be `kind:value`, got `{v}`")))?;
                    Some(match kind {
                        "color" => Literal::Color(match value {
                            "free" => Slot::Free(slots.free("literal", SlotKind::Color)),
                            w => Slot::Fixed(w.parse()?),
                        }),
                        "shape" => Literal::Shape(match value {
                            "free" => Slot::Free(slots.free("literal", SlotKind::Shape)),
                            w => Slot::Fixed(w.parse()?),
                        }),
                        other => return Err(catalog(format!("unknown literal kind `{other}`"))),
                    })
                }
            };
            Operator::Equal { literal }
        }
        "GetColor" => Operator::GetColor,
        "GetShape" => Operator::GetShape,
        "GetLoc" => Operator::GetLoc,
        "Exist" => Operator::Exist,
        "And" => Operator::And,
        "Switch" => Operator::Switch,
        _ => unreachable!(),
    })
}

/// Ports an operator requires, as `(port, accepted input types)`.
fn required_ports(op: &Operator) -> Vec<(Port, &'static [ValueType])> {
    use ValueType as V;
    const RESPONSE: &[ValueType] = &[V::Color, V::Shape, V::Location, V::Bool];
    match op {
        Operator::Select(p) => {
            let mut ports = Vec::new();
            if matches!(p.color, AttrParam::Wired) {
                ports.push((Port::Color, &[V::Color][..]));
            }
            if matches!(p.shape, AttrParam::Wired) {
                ports.push((Port::Shape, &[V::Shape][..]));
            }
            if matches!(
                p.space,
                Some(SpaceParam {
                    anchor: AnchorParam::Wired,
                    ..
                })
            ) {
                ports.push((Port::Anchor, &[V::Location][..]));
            }
            ports
        }
        Operator::GetColor | Operator::GetShape | Operator::GetLoc | Operator::Exist => {
            vec![(Port::Objects, &[V::Objects][..])]
        }
        Operator::Equal {
            literal: Some(Literal::Color(_)),
        } => vec![(Port::Left, &[V::Color][..])],
        Operator::Equal {
            literal: Some(Literal::Shape(_)),
        } => vec![(Port::Left, &[V::Shape][..])],
        Operator::Equal { literal: None } => vec![
            (Port::Left, &[V::Color, V::Shape][..]),
            (Port::Right, &[V::Color, V::Shape][..]),
        ],
        Operator::And => vec![(Port::Left, &[V::Bool][..]), (Port::Right, &[V::Bool][..])],
        Operator::Switch => vec![
            (Port::Cond, &[V::Bool][..]),
            (Port::Then, RESPONSE),
            (Port::Else, RESPONSE),
        ],
    }
}

/// Validates a declarative spec into a [`TaskGraph`].
pub fn build_graph(spec: &GraphSpec) -> Result<TaskGraph, GraphError> {
    let n = spec.nodes.len();
    if !(MIN_NODES..=MAX_NODES).contains(&n) {
        return Err(catalog(format!(
            "graph has {n} nodes, expected {MIN_NODES}..={MAX_NODES}"
        )));
    }

    let mut index: BTreeMap<&str, NodeId> = BTreeMap::new();
    for (i, node) in spec.nodes.iter().enumerate() {
        if index.insert(node.id.as_str(), i).is_some() {
            return Err(catalog(format!("duplicate node id `{}`", node.id)));
        }
    }

    let mut slots = SlotTable {
        kinds: Vec::new(),
        names: Vec::new(),
        node: String::new(),
    };
    let mut nodes = Vec::with_capacity(n);
    for ns in &spec.nodes {
        slots.node.clone_from(&ns.id);
        nodes.push(Node {
            name: ns.id.clone(),
            op: parse_operator(ns, &mut slots)?,
            inputs: Vec::new(),
        });
    }

    let mut consumers = vec![Vec::new(); n];
    for e in &spec.edges {
        let from = *index
            .get(e.from.as_str())
            .ok_or_else(|| catalog(format!("edge from unknown node `{}`", e.from)))?;
        let to = *index
            .get(e.to.as_str())
            .ok_or_else(|| catalog(format!("edge to unknown node `{}`", e.to)))?;
        let port = Port::parse(&e.port).ok_or_else(|| arity(&e.to, format!("unknown port `{}`", e.port)))?;
        if nodes[to].input(port).is_some() {
            return Err(arity(&e.to, format!("port `{}` connected twice", e.port)));
        }
        nodes[to].inputs.push((port, from));
        consumers[from].push(to);
    }

    let order = topo_sort(&nodes, &consumers).map_err(|stuck| GraphError::Cycle(nodes[stuck].name.clone()))?;

    let mut types = vec![ValueType::Objects; n];
    for &id in &order {
        let node = &nodes[id];
        let ports = required_ports(&node.op);
        for (port, _) in &node.inputs {
            if !ports.iter().any(|(p, _)| p == port) {
                return Err(arity(
                    &node.name,
                    format!("{} has no `{}` input", node.op.kind_name(), port.name()),
                ));
            }
        }
        for (port, accepted) in &ports {
            let src = node.input(*port).ok_or_else(|| {
                arity(
                    &node.name,
                    format!("{} is missing its `{}` input", node.op.kind_name(), port.name()),
                )
            })?;
            if !accepted.contains(&types[src]) {
                return Err(arity(
                    &node.name,
                    format!(
                        "`{}` input from `{}` has type {:?}, expected one of {:?}",
                        port.name(),
                        nodes[src].name,
                        types[src],
                        accepted
                    ),
                ));
            }
        }
        types[id] = match &node.op {
            Operator::Select(_) => ValueType::Objects,
            Operator::GetColor => ValueType::Color,
            Operator::GetShape => ValueType::Shape,
            Operator::GetLoc => ValueType::Location,
            Operator::Exist | Operator::And => ValueType::Bool,
            Operator::Equal { literal } => {
                if literal.is_none() {
                    let l = types[node.input(Port::Left).unwrap()];
                    let r = types[node.input(Port::Right).unwrap()];
                    if l != r {
                        return Err(arity(&node.name, format!("Equal compares {l:?} with {r:?}")));
                    }
                }
                ValueType::Bool
            }
            Operator::Switch => {
                let a = types[node.input(Port::Then).unwrap()];
                let b = types[node.input(Port::Else).unwrap()];
                if a == b {
                    a
                } else {
                    ValueType::Mixed
                }
            }
        };
    }

    let sinks: Vec<NodeId> = (0..n).filter(|&i| consumers[i].is_empty()).collect();
    let root = *index
        .get(spec.root.as_str())
        .ok_or_else(|| catalog(format!("root `{}` is not a node", spec.root)))?;
    if sinks != [root] {
        let names: Vec<&str> = sinks.iter().map(|&i| nodes[i].name.as_str()).collect();
        return Err(catalog(format!(
            "graph must have exactly one root `{}` reached by every node, found sinks {names:?}",
            spec.root
        )));
    }
    if types[root] == ValueType::Objects {
        return Err(catalog("root must produce a response, not an object set"));
    }

    let switches: Vec<NodeId> = (0..n).filter(|&i| matches!(nodes[i].op, Operator::Switch)).collect();
    if switches.len() > 1 {
        return Err(catalog("at most one Switch is allowed"));
    }
    if let Some(&s) = switches.first() {
        if s != root {
            return Err(arity(&nodes[s].name, "Switch output may only be the root"));
        }
    }

    let distinct = resolve_distinct(&spec.distinct, &slots)?;

    Ok(TaskGraph {
        nodes,
        root,
        order,
        consumers,
        types,
        slots: slots.kinds,
        distinct,
    })
}

fn resolve_distinct(pairs: &[(String, String)], slots: &SlotTable) -> Result<Vec<(SlotId, SlotId)>, GraphError> {
    let find = |name: &str| {
        slots
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| catalog(format!("distinct: `{name}` is not a free slot")))
    };
    let mut out: Vec<(SlotId, SlotId)> = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let (x, y) = (find(a)?, find(b)?);
        let (x, y) = (x.min(y), x.max(y));
        if x == y {
            return Err(catalog(format!("distinct: `{a}` paired with itself")));
        }
        let kind = &slots.kinds[x];
        if kind != &slots.kinds[y] || matches!(kind, SlotKind::Anchor) {
            return Err(catalog(format!(
                "distinct: `{a}` and `{b}` must be discrete slots of the same kind"
            )));
        }
        if out.iter().any(|&(p, q)| [p, q].contains(&x) || [p, q].contains(&y)) {
            return Err(catalog(format!("distinct: `{a}` or `{b}` already paired")));
        }
        out.push((x, y));
    }
    Ok(out)
}

/// Kahn's algorithm, smallest id first. Returns a node on a cycle on failure.
fn topo_sort(nodes: &[Node], consumers: &[Vec<NodeId>]) -> Result<Vec<NodeId>, NodeId> {
    let n = nodes.len();
    let mut indegree: Vec<usize> = nodes.iter().map(|nd| nd.inputs.len()).collect();
    let mut ready: std::collections::BTreeSet<NodeId> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(id) = ready.pop_first() {
        order.push(id);
        for &c in &consumers[id] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).find(|&i| indegree[i] > 0).unwrap())
    }
}

impl fmt::Display for TaskGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &id in &self.order {
            let node = &self.nodes[id];
            write!(f, "{}={}", node.name, node.op.kind_name())?;
            if !node.inputs.is_empty() {
                let ins: Vec<String> = node
                    .inputs
                    .iter()
                    .map(|(p, s)| format!("{}:{}", p.name(), self.nodes[*s].name))
                    .collect();
                write!(f, "({})", ins.join(","))?;
            }
            if id != self.root {
                write!(f, "; ")?;
            }
        }
        Ok(())
    }
}
