use proptest::prelude::*;

use cog_core::attr::{Color, Location, Shape, TimeRef};
use cog_core::catalog::Catalog;
use cog_core::eval::ChiSquareTest;
use cog_core::generate::{sample_target, EpisodeGenerator, GenerationConfig};
use cog_core::graph::{Operator, Port};
use cog_core::instance::{instantiate, SelectDesc};
use cog_core::interp::{select_objects, time_window, window_matches, Interpreter, NoProbe, Value};
use cog_core::response::{OutputSpace, ResponseValue};
use cog_core::rng::derive_rng;
use cog_core::scene::{Frame, SceneObject};

type Obj = (usize, usize, f64, f64);

fn object() -> impl Strategy<Value = Obj> {
    // A small palette and shape set so selections actually hit.
    (0..4usize, 0..4usize, 0.08..0.92f64, 0.08..0.92f64)
}

fn history() -> impl Strategy<Value = Vec<Vec<Obj>>> {
    prop::collection::vec(prop::collection::vec(object(), 0..4), 1..7)
}

fn frames_of(h: &[Vec<Obj>]) -> Vec<Frame> {
    let mut frames = Frame::sequence(h.len());
    for (f, objs) in h.iter().enumerate() {
        for &(c, s, x, y) in objs {
            frames[f].push(SceneObject::new(Color::ALL[c], Shape::ALL[s], Location::new(x, y), f));
        }
    }
    frames
}

fn time_ref() -> impl Strategy<Value = TimeRef> {
    prop_oneof![Just(TimeRef::Now), Just(TimeRef::Latest), Just(TimeRef::Last)]
}

fn desc(color: Option<usize>, shape: Option<usize>, time: TimeRef) -> SelectDesc {
    SelectDesc {
        color: color.map(|c| Color::ALL[c]),
        shape: shape.map(|s| Shape::ALL[s]),
        space: None,
        time,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn window_is_bounded_by_memory(t in 0usize..20, m in 0usize..10, time in time_ref()) {
        match time_window(time, t, m) {
            None => prop_assert!(time == TimeRef::Last && (t == 0 || m == 0)),
            Some(w) => {
                prop_assert!(*w.end() <= t && t - *w.start() <= m);
                match time {
                    TimeRef::Now => prop_assert_eq!(w, t..=t),
                    TimeRef::Latest => prop_assert_eq!(w, t.saturating_sub(m)..=t),
                    TimeRef::Last => prop_assert_eq!(w, t.saturating_sub(m)..=t - 1),
                }
            }
        }
    }

    #[test]
    fn select_returns_the_most_recent_matching_frame(
        h in history(),
        color in prop::option::of(0..4usize),
        shape in prop::option::of(0..4usize),
        time in time_ref(),
        m in 0usize..6,
        pick in any::<prop::sample::Index>(),
    ) {
        let frames = frames_of(&h);
        let t = pick.index(frames.len());
        let d = desc(color, shape, time);
        let all = window_matches(&d, &frames, t, m);
        match select_objects(&d, &frames, t, m, &mut NoProbe) {
            Value::Invalid => prop_assert!(time_window(time, t, m).is_none()),
            Value::Objects(hits) => {
                let newest = all.iter().map(|r| r.frame).max();
                let expected: Vec<_> = all.iter().filter(|r| Some(r.frame) == newest).copied().collect();
                prop_assert_eq!(hits, expected);
            }
            other => prop_assert!(false, "select gave {:?}", other),
        }
    }

    #[test]
    fn non_matching_objects_never_change_a_selection(
        h in history(),
        color in 0..4usize,
        time in time_ref(),
        m in 0usize..6,
        extra in object(),
        pick in any::<prop::sample::Index>(),
        at in any::<prop::sample::Index>(),
    ) {
        let mut frames = frames_of(&h);
        let t = pick.index(frames.len());
        let d = desc(Some(color), None, time);
        let before = select_objects(&d, &frames, t, m, &mut NoProbe);
        // Same shape as anything, a color outside the selection.
        let f = at.index(frames.len());
        let other = Color::ALL[4 + extra.0];
        frames[f].push(SceneObject::new(other, Shape::ALL[extra.1], Location::new(extra.2, extra.3), f));
        prop_assert_eq!(before, select_objects(&d, &frames, t, m, &mut NoProbe));
    }

    #[test]
    fn a_match_in_the_current_frame_is_seen_by_now_and_latest(
        h in history(),
        shape in 0..4usize,
        latest in any::<bool>(),
        m in 0usize..6,
        pick in any::<prop::sample::Index>(),
    ) {
        let mut frames = frames_of(&h);
        let t = pick.index(frames.len());
        let time = if latest { TimeRef::Latest } else { TimeRef::Now };
        let d = desc(None, Some(shape), time);
        frames[t].push(SceneObject::new(Color::Navy, Shape::ALL[shape], Location::new(0.5, 0.5), t));
        let Value::Objects(hits) = select_objects(&d, &frames, t, m, &mut NoProbe) else {
            return Err(TestCaseError::fail("not an object set"));
        };
        prop_assert!(hits.iter().all(|r| r.frame == t));
        prop_assert!(hits.iter().any(|r| r.get(&frames).color == Color::Navy));
        // `last` never reads the current frame.
        let last = desc(None, Some(shape), TimeRef::Last);
        if let Value::Objects(hits) = select_objects(&last, &frames, t, m, &mut NoProbe) {
            prop_assert!(hits.iter().all(|r| r.frame < t));
        }
    }

    #[test]
    fn invalid_inputs_are_absorbed_and_switch_is_lazy(
        task in any::<prop::sample::Index>(),
        seed in any::<u64>(),
        h in history(),
        m in 0usize..5,
    ) {
        let catalog = Catalog::builtin();
        let entry = &catalog.tasks()[task.index(catalog.len())];
        let inst = instantiate(&entry.name, &entry.graph, &mut derive_rng(seed, 0));
        let frames = frames_of(&h);
        let graph = &entry.graph;
        for t in 0..frames.len() {
            let mut it = Interpreter::new(&inst, &frames, t, m);
            let root = it.root_value();
            let memo = it.memo().to_vec();
            prop_assert_eq!(memo[graph.root()].as_ref(), Some(&root));
            for (id, value) in memo.iter().enumerate() {
                let Some(value) = value else { continue };
                let node = graph.node(id);
                if let Operator::Switch = node.op {
                    let cond = &memo[node.input(Port::Cond).unwrap()];
                    let (then, other) = (node.input(Port::Then).unwrap(), node.input(Port::Else).unwrap());
                    match cond {
                        Some(Value::Bool(b)) => {
                            let (taken, skipped) = if *b { (then, other) } else { (other, then) };
                            prop_assert_eq!(memo[taken].as_ref(), Some(value));
                            if graph.consumers(skipped).len() == 1 {
                                prop_assert!(memo[skipped].is_none(), "untaken branch evaluated");
                            }
                        }
                        Some(Value::Invalid) => prop_assert_eq!(value, &Value::Invalid),
                        other => prop_assert!(false, "condition {:?}", other),
                    }
                    continue;
                }
                for (_, input) in &node.inputs {
                    if memo[*input] == Some(Value::Invalid) {
                        prop_assert_eq!(value, &Value::Invalid, "{} absorbed nothing", node.name);
                    }
                }
            }
        }
    }
}

#[test]
fn near_misses_differ_in_exactly_one_dimension() {
    let catalog = Catalog::builtin();
    for config in [GenerationConfig::canonical(4), GenerationConfig::hard(4)] {
        let g = EpisodeGenerator::new(catalog, config).unwrap();
        let mut seen = 0;
        for task in catalog.names() {
            for i in 0..40 {
                let (ep, trace) = g.generate_traced(task, i).unwrap();
                for nm in &trace.near_misses {
                    seen += 1;
                    assert_eq!(nm.differing_dimensions(), 1, "{}: {nm:?}", ep.id());
                    let f = nm.object.frame_index;
                    assert!(
                        ep.frames[f].objects.contains(&nm.object),
                        "{}: near miss removed",
                        ep.id()
                    );
                }
            }
        }
        assert!(seen > 500, "only {seen} near misses");
    }
}

#[test]
fn sampled_targets_are_uniform() {
    let catalog = Catalog::builtin();
    let mut rng = derive_rng(8, 8);
    for name in ["GetColor", "GetShape", "Exist", "AndCompareColor"] {
        let entry = catalog.get(name).unwrap();
        let space = entry.output_space();
        let words = space.verbal_words();
        let mut counts = vec![0u64; words.len()];
        for _ in 0..50_000 {
            let inst = instantiate(name, &entry.graph, &mut rng);
            let target = sample_target(&inst, &mut rng);
            let w = target.word().unwrap();
            counts[words.iter().position(|x| *x == w).unwrap()] += 1;
        }
        let test = ChiSquareTest::uniform(space.clone(), &counts);
        assert!(!test.rejects(1e-3), "{name}: {test:?}");
    }
    // Switch roots pick each branch half the time.
    let entry = catalog.get("ExistGoOrColor").unwrap();
    let points = (0..20_000)
        .filter(|_| {
            let inst = instantiate("ExistGoOrColor", &entry.graph, &mut rng);
            matches!(sample_target(&inst, &mut rng), ResponseValue::Point(_))
        })
        .count();
    assert!((9_600..10_400).contains(&points), "{points}");
    assert!(matches!(entry.output_space(), OutputSpace::Switch { .. }));
}
