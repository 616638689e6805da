//! Scoring responses against recorded targets.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::attr::Location;
use crate::generate::Episode;
use crate::response::{ResponseValue, POINTING_GRID};

/// Width of the pointing Gaussian, in canvas fractions.
pub const POINTING_SIGMA: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Correct,
    Incorrect,
    Skipped,
}

/// Grid cell `(column, row)` holding `loc`. The far edges belong to the
/// last cell.
pub fn grid_cell(loc: &Location) -> (usize, usize) {
    let cell = |v: f64| ((v * POINTING_GRID as f64).floor().max(0.0) as usize).min(POINTING_GRID - 1);
    (cell(loc.x), cell(loc.y))
}

pub fn cell_center(col: usize, row: usize) -> Location {
    let c = |i: usize| (i as f64 + 0.5) / POINTING_GRID as f64;
    Location::new(c(col), c(row))
}

/// Normalized Gaussian weights of the 49 cells, row-major (`row * 7 + col`).
pub fn pointing_distribution(target: &Location) -> [f64; POINTING_GRID * POINTING_GRID] {
    let mut p = [0.0; POINTING_GRID * POINTING_GRID];
    for row in 0..POINTING_GRID {
        for col in 0..POINTING_GRID {
            let c = cell_center(col, row);
            let d2 = (c.x - target.x).powi(2) + (c.y - target.y).powi(2);
            p[row * POINTING_GRID + col] = (-d2 / (2.0 * POINTING_SIGMA * POINTING_SIGMA)).exp();
        }
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    p
}

/// Invalid targets are skipped; words must match exactly (booleans as
/// `true`/`false`); points must land in the target's grid cell.
pub fn score_frame(pred: &ResponseValue, target: &ResponseValue) -> Outcome {
    match (pred, target) {
        (_, ResponseValue::Invalid) => Outcome::Skipped,
        (ResponseValue::Point(p), ResponseValue::Point(t)) if grid_cell(p) == grid_cell(t) => Outcome::Correct,
        (ResponseValue::Point(_), _) | (_, ResponseValue::Point(_)) => Outcome::Incorrect,
        (p, t) => match (p.word(), t.word()) {
            (Some(a), Some(b)) if a == b => Outcome::Correct,
            _ => Outcome::Incorrect,
        },
    }
}

/// A model response for one frame of one episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub episode: String,
    pub frame: usize,
    pub response: ResponseValue,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskScore {
    pub correct: u64,
    pub incorrect: u64,
    pub skipped: u64,
    /// Scored frames with no answer; counted as incorrect.
    pub missing: u64,
    /// `correct / (correct + incorrect)`, `None` if nothing was scored.
    pub accuracy: Option<f64>,
}

impl TaskScore {
    fn add(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::Correct => self.correct += 1,
            Outcome::Incorrect => self.incorrect += 1,
            Outcome::Skipped => self.skipped += 1,
        }
    }

    fn merge(&mut self, other: &TaskScore) {
        self.correct += other.correct;
        self.incorrect += other.incorrect;
        self.skipped += other.skipped;
        self.missing += other.missing;
    }

    fn finish(&mut self) {
        let scored = self.correct + self.incorrect;
        self.accuracy = (scored > 0).then(|| self.correct as f64 / scored as f64);
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub tasks: BTreeMap<String, TaskScore>,
    pub overall: TaskScore,
    /// Answers naming an episode or frame that was not scored.
    pub unmatched: u64,
}

/// Accumulates outcomes per task.
#[derive(Clone, Debug, Default)]
pub struct Scorer {
    report: ScoreReport,
}

impl Scorer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, task: &str, outcome: Outcome) {
        self.report.tasks.entry(task.to_string()).or_default().add(outcome);
    }

    fn record_missing(&mut self, task: &str) {
        let score = self.report.tasks.entry(task.to_string()).or_default();
        score.add(Outcome::Incorrect);
        score.missing += 1;
    }

    /// Scores every frame of `episode` from `answers`, keyed by
    /// `(episode id, frame)`. Used answers are removed from the map.
    pub fn score_episode(&mut self, episode: &Episode, answers: &mut HashMap<(String, usize), ResponseValue>) {
        let id = episode.id();
        for (t, target) in episode.targets.iter().enumerate() {
            match answers.remove(&(id.clone(), t)) {
                Some(pred) => self.record(episode.task(), score_frame(&pred, target)),
                None if target.is_invalid() => self.record(episode.task(), Outcome::Skipped),
                None => self.record_missing(episode.task()),
            }
        }
    }

    pub fn finish(mut self, unmatched: u64) -> ScoreReport {
        let mut overall = TaskScore::default();
        for score in self.report.tasks.values_mut() {
            score.finish();
            overall.merge(score);
        }
        overall.finish();
        self.report.overall = overall;
        self.report.unmatched = unmatched;
        self.report
    }
}

/// Scores `answers` against `episodes`.
pub fn score_answers<'e>(episodes: impl IntoIterator<Item = &'e Episode>, answers: &[Answer]) -> ScoreReport {
    let mut keyed: HashMap<(String, usize), ResponseValue> = answers
        .iter()
        .map(|a| ((a.episode.clone(), a.frame), a.response.clone()))
        .collect();
    let mut scorer = Scorer::new();
    for episode in episodes {
        scorer.score_episode(episode, &mut keyed);
    }
    scorer.finish(keyed.len() as u64)
}

/// The episodes' own targets as answers.
pub fn oracle_answers<'e>(episodes: impl IntoIterator<Item = &'e Episode>) -> Vec<Answer> {
    episodes
        .into_iter()
        .flat_map(|e| {
            let id = e.id();
            e.targets.iter().enumerate().map(move |(frame, t)| Answer {
                episode: id.clone(),
                frame,
                response: t.clone(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attr::Color;

    fn pt(x: f64, y: f64) -> ResponseValue {
        ResponseValue::Point(Location::new(x, y))
    }

    #[test]
    fn frame_outcomes() {
        let red = ResponseValue::color(Color::Red);
        assert_eq!(score_frame(&red, &red), Outcome::Correct);
        assert_eq!(
            score_frame(&ResponseValue::color(Color::Navy), &red),
            Outcome::Incorrect
        );
        assert_eq!(score_frame(&pt(0.51, 0.49), &pt(0.5, 0.5)), Outcome::Correct);
        assert_eq!(score_frame(&pt(0.6, 0.5), &pt(0.5, 0.5)), Outcome::Incorrect);
        assert_eq!(score_frame(&pt(0.5, 0.5), &red), Outcome::Incorrect);
        assert_eq!(score_frame(&red, &pt(0.5, 0.5)), Outcome::Incorrect);
        assert_eq!(score_frame(&red, &ResponseValue::Invalid), Outcome::Skipped);
        assert_eq!(score_frame(&ResponseValue::Invalid, &red), Outcome::Incorrect);
        assert_eq!(
            score_frame(&ResponseValue::Verbal("true".into()), &ResponseValue::Bool(true)),
            Outcome::Correct
        );
    }

    #[test]
    fn cells() {
        assert_eq!(grid_cell(&Location::new(0.0, 1.0)), (0, 6));
        assert_eq!(grid_cell(&Location::new(0.5, 0.5)), (3, 3));
        assert_eq!(grid_cell(&Location::new(1.0 / 7.0, 0.999)), (1, 6));
        assert_eq!(grid_cell(&cell_center(4, 2)), (4, 2));
    }

    /// Independent of the row-major sum: separable form, each axis summed on
    /// its own.
    #[test]
    fn center_cell_probability() {
        let p = pointing_distribution(&Location::new(0.5, 0.5));
        let axis: f64 = (0..7)
            .map(|i| {
                let d = (i as f64 + 0.5) / 7.0 - 0.5;
                (-d * d / 0.02).exp()
            })
            .sum();
        let expected = 1.0 / (axis * axis);
        assert!((p[24] - expected).abs() < 1e-12);
        // Frozen value of the same quantity.
        assert!((p[24] - 0.324_724_2).abs() < 1e-6, "{}", p[24]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn argmax_follows_target() {
        let argmax = |p: &[f64; 49]| (0..49).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
        for row in 0..7 {
            for col in 0..7 {
                let c = cell_center(col, row);
                assert_eq!(argmax(&pointing_distribution(&c)), row * 7 + col);
                if col < 6 {
                    let shifted = Location::new(c.x + 1.0 / 7.0, c.y);
                    assert_eq!(argmax(&pointing_distribution(&shifted)), row * 7 + col + 1);
                }
            }
        }
    }
}
