//! Counting distinct task instances.
//!
//! Every free slot multiplies the count by the size of its value set, less one
//! for the later slot of a distinct pair. Anchors are continuous, so they are
//! counted on a `grid × grid` discretization.

use num_bigint::BigUint;

use crate::attr::{NUM_COLORS, NUM_SHAPES};
use crate::graph::{SlotKind, TaskGraph};

pub fn slot_cardinality(kind: &SlotKind, anchor_grid: u32) -> BigUint {
    match kind {
        SlotKind::Color => BigUint::from(NUM_COLORS),
        SlotKind::Shape => BigUint::from(NUM_SHAPES),
        SlotKind::Time(allowed) => BigUint::from(allowed.len()),
        SlotKind::Relation => BigUint::from(4u32),
        SlotKind::Anchor => BigUint::from(anchor_grid) * BigUint::from(anchor_grid),
    }
}

/// Number of distinct instances of one graph.
pub fn instance_count(graph: &TaskGraph, anchor_grid: u32) -> BigUint {
    graph
        .slots()
        .iter()
        .enumerate()
        .map(|(i, k)| {
            let n = slot_cardinality(k, anchor_grid);
            if graph.distinct_from(i).is_some() {
                n - 1u32
            } else {
                n
            }
        })
        .product()
}

/// Total over several graphs.
pub fn total_count<'a>(graphs: impl IntoIterator<Item = &'a TaskGraph>, anchor_grid: u32) -> BigUint {
    graphs.into_iter().map(|g| instance_count(g, anchor_grid)).sum()
}

/// Base-10 order of magnitude (`floor(log10(n))`), `None` for zero.
pub fn order_of_magnitude(n: &BigUint) -> Option<u32> {
    if *n == BigUint::ZERO {
        None
    } else {
        Some(n.to_str_radix(10).len() as u32 - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::taskfile::parse_graph;

    #[test]
    fn product_of_slots() {
        let g = build_graph(
            &parse_graph(
                "node s Select color=free shape=free space=free@free time=free\nnode l GetLoc\n\
                 edge s -> l objects\nroot l\n",
            )
            .unwrap(),
        )
        .unwrap();
        // 19 * 32 * 4 * 10^2 * 3
        assert_eq!(instance_count(&g, 10), BigUint::from(729_600u32));
        assert_eq!(instance_count(&g, 1), BigUint::from(7_296u32));
    }

    #[test]
    fn distinct_pair_drops_collisions() {
        let g = build_graph(
            &parse_graph(
                "node a Select color=free shape=free time=now\nnode b Select shape=free time=latest\n\
                 node ca GetColor\nnode cb GetColor\nnode q Equal\n\
                 edge a -> ca objects\nedge b -> cb objects\nedge ca -> q left\nedge cb -> q right\n\
                 distinct a.shape b.shape\nroot q\n",
            )
            .unwrap(),
        )
        .unwrap();
        let brute = (0..19)
            .flat_map(|_| (0..32).flat_map(|x| (0..32).map(move |y| (x, y))))
            .filter(|(x, y)| x != y)
            .count();
        assert_eq!(instance_count(&g, 10), BigUint::from(brute));
    }

    #[test]
    fn magnitude() {
        assert_eq!(order_of_magnitude(&BigUint::from(999u32)), Some(2));
        assert_eq!(order_of_magnitude(&BigUint::from(1000u32)), Some(3));
        assert_eq!(order_of_magnitude(&BigUint::ZERO), None);
    }
}
