//! Chance levels of a uniform guesser.

use crate::batch::{map_indices, Execution};
use crate::catalog::Catalog;
use crate::error::GenerateError;
use crate::generate::EpisodeGenerator;
use crate::response::{OutputSpace, ResponseValue, POINTING_GRID};
use crate::rng::{derive_rng, pick};

use super::score::{cell_center, score_frame, Outcome};

/// Accuracy of a guesser uniform over the answer classes of `space`.
///
/// Any recorded target is one of the classes, so whatever the target
/// distribution the guess hits it with probability `1 / classes`.
pub fn chance_level(space: &OutputSpace) -> f64 {
    1.0 / space.class_count() as f64
}

/// Per-task chance levels in catalog order, and their mean.
pub fn catalog_chance(catalog: &Catalog) -> (Vec<(String, f64)>, f64) {
    let levels: Vec<(String, f64)> = catalog
        .tasks()
        .iter()
        .map(|t| (t.name.clone(), chance_level(&t.output_space())))
        .collect();
    let mean = if levels.is_empty() {
        0.0
    } else {
        levels.iter().map(|(_, c)| c).sum::<f64>() / levels.len() as f64
    };
    (levels, mean)
}

/// Every answer class of `space` as a response; pointing classes are the
/// cell centers.
pub fn answer_classes(space: &OutputSpace) -> Vec<ResponseValue> {
    let mut out: Vec<ResponseValue> = Vec::with_capacity(space.class_count());
    for leaf in space.leaves() {
        match leaf {
            OutputSpace::Bool => out.extend([ResponseValue::Bool(true), ResponseValue::Bool(false)]),
            OutputSpace::Pointing => {
                for row in 0..POINTING_GRID {
                    for col in 0..POINTING_GRID {
                        out.push(ResponseValue::Point(cell_center(col, row)));
                    }
                }
            }
            other => out.extend(
                other
                    .verbal_words()
                    .into_iter()
                    .map(|w| ResponseValue::Verbal(w.to_string())),
            ),
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulatedChance {
    pub accuracy: f64,
    /// Frames with a valid target.
    pub scored: u64,
}

/// Plays a uniform guesser against `episodes` generated episodes of `task`.
/// Guesses for episode `i` come from stream `(guess_seed, i)`.
pub fn simulate_chance(
    generator: &EpisodeGenerator<'_>,
    task: &str,
    episodes: u64,
    guess_seed: u64,
    exec: Execution,
) -> Result<SimulatedChance, GenerateError> {
    let entry = generator
        .catalog()
        .get(task)
        .ok_or_else(|| GenerateError::UnknownTask(task.to_string()))?;
    let classes = answer_classes(&entry.output_space());
    let per_episode = map_indices(exec, 0..episodes, |i| {
        let episode = generator.generate(task, i)?;
        let mut rng = derive_rng(guess_seed, i);
        let (mut correct, mut scored) = (0u64, 0u64);
        for target in &episode.targets {
            let guess = &classes[pick(&mut rng, classes.len())];
            match score_frame(guess, target) {
                Outcome::Correct => {
                    correct += 1;
                    scored += 1;
                }
                Outcome::Incorrect => scored += 1,
                Outcome::Skipped => {}
            }
        }
        Ok((correct, scored))
    });
    let (mut correct, mut scored) = (0u64, 0u64);
    for r in per_episode {
        let (c, s) = r?;
        correct += c;
        scored += s;
    }
    Ok(SimulatedChance {
        accuracy: if scored == 0 {
            0.0
        } else {
            correct as f64 / scored as f64
        },
        scored,
    })
}
