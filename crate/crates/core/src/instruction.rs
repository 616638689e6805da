//! Natural-language instructions rendered from a task instance.
//!
//! Each operator contributes one template fragment; the root fragment is the
//! instruction. Fragments only mention bound values, never scene content, so
//! the instruction is fixed for a whole episode.

use crate::graph::{AnchorParam, AttrParam, NodeId, Operator, Port};
use crate::instance::{Binding, TaskInstance};

/// Renders the instruction for `instance`.
pub fn render_instruction(instance: &TaskInstance) -> String {
    fragment(instance, instance.graph.root())
}

/// Renders the phrase for node `id`.
pub fn fragment(instance: &TaskInstance, id: NodeId) -> String {
    let node = instance.graph.node(id);
    let input = |port: Port| fragment(instance, node.input(port).unwrap());
    match &node.op {
        Operator::Select(p) => {
            let mut words: Vec<String> = Vec::new();
            words.push(instance.time(&p.time).word().to_string());
            if let AttrParam::Given(c) = &p.color {
                words.push(instance.color(c).word().to_string());
            }
            if let AttrParam::Given(s) = &p.shape {
                words.push(instance.shape(s).word().to_string());
            }
            if words.len() == 1 {
                words.push("object".to_string());
            }
            if let Some(sp) = &p.space {
                let rel = instance.relation(&sp.relation).phrase();
                match &sp.anchor {
                    AnchorParam::Given(a) => words.push(format!("{rel} {}", instance.anchor(a))),
                    AnchorParam::Wired => {
                        // The anchor comes from GetLoc over another selection.
                        let loc = node.input(Port::Anchor).unwrap();
                        let sel = instance.graph.node(loc).input(Port::Objects).unwrap();
                        words.push(format!("{rel} {}", fragment(instance, sel)));
                    }
                }
            }
            if matches!(p.color, AttrParam::Wired) {
                words.push(format!("with {}", input(Port::Color)));
            }
            if matches!(p.shape, AttrParam::Wired) {
                words.push(format!("with {}", input(Port::Shape)));
            }
            words.join(" ")
        }
        Operator::GetColor => format!("color of {}", input(Port::Objects)),
        Operator::GetShape => format!("shape of {}", input(Port::Objects)),
        Operator::GetLoc => format!("point to {}", input(Port::Objects)),
        Operator::Exist => format!("exist {}", input(Port::Objects)),
        Operator::Equal { literal } => {
            let right = match literal {
                Some(lit) => match instance.literal(lit) {
                    Binding::Color(c) => c.word().to_string(),
                    Binding::Shape(s) => s.word().to_string(),
                    _ => unreachable!(),
                },
                None => input(Port::Right),
            };
            format!("{} equal {right}", input(Port::Left))
        }
        Operator::And => format!("{} and {}", input(Port::Left), input(Port::Right)),
        Operator::Switch => format!(
            "if {} then {} else {}",
            input(Port::Cond),
            input(Port::Then),
            input(Port::Else)
        ),
    }
}
