//! The declarative task-file format.
//!
//! ```text
//! # ExistColor: is there a red object (now / last / latest)?
//! task ExistColor
//! family Exist
//! generator backward
//! node s Select color=free time=free
//! node e Exist
//! edge s -> e objects
//! root e
//! ```
//!
//! One directive per line, `#` starts a comment. `generator` is `backward`
//! (default) or `handcrafted`. Parameter values are `free`, `wired` (fed by an
//! edge into the matching port) or a literal. `distinct a.shape b.shape`
//! makes two free slots bind different values. See `docs/task-format.md`.

use crate::error::{GraphError, ParseError};
use crate::graph::{build_graph, EdgeSpec, GraphSpec, NodeSpec, TaskGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    Backward,
    Handcrafted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskFile {
    pub name: String,
    pub family: String,
    pub generator: GeneratorKind,
    pub spec: GraphSpec,
}

impl TaskFile {
    pub fn build(&self) -> Result<TaskGraph, GraphError> {
        build_graph(&self.spec)
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, msg: msg.into() }
}

pub fn parse_task_file(text: &str) -> Result<TaskFile, ParseError> {
    let mut name = None;
    let mut family = None;
    let mut generator = GeneratorKind::Backward;
    let mut spec = GraphSpec::default();
    let mut root = None;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let directive = words.next().unwrap();
        let rest: Vec<&str> = words.collect();
        match directive {
            "task" => name = Some(single(&rest, lineno, "task")?),
            "family" => family = Some(single(&rest, lineno, "family")?),
            "generator" => {
                generator = match single(&rest, lineno, "generator")?.as_str() {
                    "backward" => GeneratorKind::Backward,
                    "handcrafted" => GeneratorKind::Handcrafted,
                    other => return Err(syntax(lineno, format!("unknown generator `{other}`"))),
                }
            }
            "node" => {
                if rest.len() < 2 {
                    return Err(syntax(lineno, "expected `node <id> <Kind> [param=value ...]`"));
                }
                let params = rest[2..]
                    .iter()
                    .map(|kv| {
                        kv.split_once('=')
                            .map(|(k, v)| (k.to_string(), v.to_string()))
                            .ok_or_else(|| syntax(lineno, format!("expected param=value, got `{kv}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                spec.nodes.push(NodeSpec {
                    id: rest[0].to_string(),
                    kind: rest[1].to_string(),
                    params,
                });
            }
            "edge" => match rest.as_slice() {
                [from, "->", to, port] => spec.edges.push(EdgeSpec {
                    from: from.to_string(),
                    to: to.to_string(),
                    port: port.to_string(),
                }),
                _ => return Err(syntax(lineno, "expected `edge <from> -> <to> <port>`")),
            },
            "root" => root = Some(single(&rest, lineno, "root")?),
            "distinct" => match rest.as_slice() {
                [a, b] => spec.distinct.push((a.to_string(), b.to_string())),
                _ => return Err(syntax(lineno, "expected `distinct <node>.<param> <node>.<param>`")),
            },
            other => return Err(syntax(lineno, format!("unknown directive `{other}`"))),
        }
    }

    spec.root = root.ok_or_else(|| syntax(0, "missing `root`"))?;
    let name = name.unwrap_or_default();
    Ok(TaskFile {
        family: family.unwrap_or_else(|| name.clone()),
        name,
        generator,
        spec,
    })
}

/// Parses just the graph portion of a task file.
pub fn parse_graph(text: &str) -> Result<GraphSpec, ParseError> {
    parse_task_file(text).map(|t| t.spec)
}

fn single(rest: &[&str], line: usize, what: &str) -> Result<String, ParseError> {
    match rest {
        [one] => Ok(one.to_string()),
        _ => Err(syntax(line, format!("`{what}` takes exactly one argument"))),
    }
}
