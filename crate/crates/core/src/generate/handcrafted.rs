//! Scripted episodes for the delayed-match tasks.
//!
//! All five tasks are expressible as graphs (see their task files), so the
//! scripts only lay out the scene; targets still come from the interpreter.
//! Script: the cue and one distractor appear at frame 0, the probe at frame
//! `g = min(2, M_max, F - 1)`; every other frame is empty, so its answer is
//! invalid.

use rand::Rng;

use crate::attr::{Color, Location, Shape};
use crate::error::GenerateError;
use crate::instance::{Binding, TaskInstance};
use crate::rng::{choose, coin, pick};
use crate::scene::{Frame, Provenance, SceneObject};

use super::place::{full_region, sample_free, PLACEMENT_TRIES};
use super::{GenerationConfig, GenerationTrace, MemoryEvent};

pub const HANDCRAFTED_TASKS: [&str; 5] = [
    "GoColorOf",
    "GoShapeOf",
    "ExistLastColorSameShape",
    "ExistLastShapeSameColor",
    "ExistLastObjectSameObject",
];

fn other_color<R: Rng + ?Sized>(rng: &mut R, not: &[Color]) -> Color {
    loop {
        let c = *choose(rng, Color::ALL);
        if !not.contains(&c) {
            return c;
        }
    }
}

fn other_shape<R: Rng + ?Sized>(rng: &mut R, not: &[Shape]) -> Shape {
    loop {
        let s = *choose(rng, Shape::ALL);
        if !not.contains(&s) {
            return s;
        }
    }
}

fn put<R: Rng + ?Sized>(
    rng: &mut R,
    frame: &mut Frame,
    color: Color,
    shape: Shape,
    provenance: Provenance,
) -> Result<(), GenerateError> {
    let loc: Location = sample_free(rng, frame, &[], full_region(), |_| true).ok_or(GenerateError::Placement {
        frame: frame.index,
        tries: PLACEMENT_TRIES,
    })?;
    let index = frame.index;
    frame.push(SceneObject::new(color, shape, loc, index).with_provenance(provenance));
    Ok(())
}

/// Lays out the scripted frames for `instance`, which must be one of
/// [`HANDCRAFTED_TASKS`].
pub fn generate_handcrafted<R: Rng + ?Sized>(
    instance: &TaskInstance,
    config: &GenerationConfig,
    rng: &mut R,
    trace: &mut GenerationTrace,
) -> Result<Vec<Frame>, GenerateError> {
    config.validate()?;
    let task = instance.task.as_str();
    if !HANDCRAFTED_TASKS.contains(&task) {
        return Err(GenerateError::UnknownTask(task.to_string()));
    }
    let gap = 2.min(config.max_memory).min(config.frames - 1);
    if gap == 0 {
        return Err(GenerateError::Config(format!(
            "{task} needs at least two frames and a memory of one frame"
        )));
    }
    use Provenance::{Distractor, Required};
    let mut cue: Vec<(Color, Shape, Provenance)> = Vec::with_capacity(2);
    let mut probe: Vec<(Color, Shape, Provenance)> = Vec::with_capacity(2);
    match task {
        "GoColorOf" => {
            let Binding::Shape(x) = instance.bindings[0] else {
                unreachable!()
            };
            let c = *choose(rng, Color::ALL);
            cue.push((c, x, Required));
            cue.push((other_color(rng, &[c]), other_shape(rng, &[x]), Distractor));
            probe.push((c, other_shape(rng, &[x]), Required));
            probe.push((other_color(rng, &[c]), other_shape(rng, &[x]), Required));
        }
        "GoShapeOf" => {
            let Binding::Color(x) = instance.bindings[0] else {
                unreachable!()
            };
            let s = *choose(rng, Shape::ALL);
            cue.push((x, s, Required));
            cue.push((other_color(rng, &[x]), other_shape(rng, &[s]), Distractor));
            probe.push((other_color(rng, &[x]), s, Required));
            probe.push((other_color(rng, &[x]), other_shape(rng, &[s]), Required));
        }
        _ => {
            let c = *choose(rng, Color::ALL);
            let s = *choose(rng, Shape::ALL);
            cue.push((c, s, Required));
            cue.push((other_color(rng, &[c]), other_shape(rng, &[s]), Distractor));
            let same = coin(rng, 0.5);
            let (pc, ps) = match (task, same) {
                (_, true) => (c, s),
                ("ExistLastColorSameShape", false) => (c, other_shape(rng, &[s])),
                ("ExistLastShapeSameColor", false) => (other_color(rng, &[c]), s),
                // Differs from the cue in exactly one attribute.
                (_, false) => {
                    if pick(rng, 2) == 0 {
                        (other_color(rng, &[c]), s)
                    } else {
                        (c, other_shape(rng, &[s]))
                    }
                }
            };
            probe.push((pc, ps, Required));
        }
    }
    let mut frames = Frame::sequence(config.frames);
    for (frame, objects) in [(0, cue), (gap, probe)] {
        for (color, shape, provenance) in objects {
            put(rng, &mut frames[frame], color, shape, provenance)?;
        }
    }
    trace.distractors_tried += 1;
    trace.memory.push(MemoryEvent {
        query_frame: gap,
        object_frame: 0,
        placed: true,
    });
    Ok(frames)
}
