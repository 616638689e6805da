//! Empirical answer distributions of generated data.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::attr::{Color, Shape};
use crate::batch::{generate_range_traced, Execution};
use crate::error::AuditError;
use crate::generate::{EpisodeGenerator, GenerationConfig};
use crate::response::{OutputSpace, ResponseValue};

use super::score::grid_cell;

/// Smallest audit that is worth reporting.
pub const MIN_AUDIT_EPISODES: u64 = 1000;

/// Pearson chi-square of observed class counts against a uniform
/// distribution over `classes.len()` classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub space: OutputSpace,
    pub samples: u64,
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

impl ChiSquareTest {
    pub fn uniform(space: OutputSpace, counts: &[u64]) -> Self {
        let samples: u64 = counts.iter().sum();
        let k = counts.len() as f64;
        let expected = samples as f64 / k;
        let statistic = if samples == 0 {
            0.0
        } else {
            counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
        };
        let dof = counts.len().saturating_sub(1) as u64;
        let p_value = if dof == 0 || samples == 0 {
            1.0
        } else {
            ChiSquared::new(dof as f64).map_or(f64::NAN, |d| d.sf(statistic))
        };
        ChiSquareTest {
            space,
            samples,
            statistic,
            dof,
            p_value,
        }
    }

    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub task: String,
    pub config: GenerationConfig,
    pub episodes: u64,
    pub output_space: OutputSpace,
    /// Valid recorded targets by class: the word, or `cell:col,row` for points.
    pub histogram: BTreeMap<String, u64>,
    pub invalid: u64,
    /// Share of `true` among boolean targets.
    pub true_rate: Option<f64>,
    /// One test per verbal part of the output space. Pointing targets are
    /// not expected to be uniform over cells (objects stay off the canvas
    /// edge), so they only appear in the histogram.
    pub chi_square: Vec<ChiSquareTest>,
    /// Gap between query frame and object frame, over all required objects
    /// found or placed for temporal queries.
    pub memory_histogram: BTreeMap<usize, u64>,
    pub mean_memory: Option<f64>,
    pub distractors_tried: u64,
    pub distractors_removed: u64,
    pub deletion_rate: Option<f64>,
    /// Episodes built by the relaxed fallback.
    pub relaxed: u64,
}

fn class_key(value: &ResponseValue) -> String {
    match value {
        ResponseValue::Point(l) => {
            let (c, r) = grid_cell(l);
            format!("cell:{c},{r}")
        }
        other => other.class_label(),
    }
}

fn ratio(a: u64, b: u64) -> Option<f64> {
    (b > 0).then(|| a as f64 / b as f64)
}

/// Generates episodes `0..n` of `task` and summarizes their targets.
pub fn audit_bias(
    generator: &EpisodeGenerator<'_>,
    task: &str,
    n: u64,
    exec: Execution,
) -> Result<AuditReport, AuditError> {
    if n < MIN_AUDIT_EPISODES {
        return Err(AuditError::TooFew {
            min: MIN_AUDIT_EPISODES,
            n,
        });
    }
    let entry = generator
        .catalog()
        .get(task)
        .ok_or_else(|| crate::error::GenerateError::UnknownTask(task.to_string()))?;
    let space = entry.output_space();
    let mut report = AuditReport {
        task: task.to_string(),
        config: *generator.config(),
        episodes: n,
        output_space: space.clone(),
        histogram: BTreeMap::new(),
        invalid: 0,
        true_rate: None,
        chi_square: Vec::new(),
        memory_histogram: BTreeMap::new(),
        mean_memory: None,
        distractors_tried: 0,
        distractors_removed: 0,
        deletion_rate: None,
        relaxed: 0,
    };
    // Bounded chunks keep memory flat for large audits.
    const CHUNK: u64 = 4096;
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK).min(n);
        for (episode, trace) in generate_range_traced(generator, task, start..end, exec)? {
            for target in &episode.targets {
                if target.is_invalid() {
                    report.invalid += 1;
                } else {
                    *report.histogram.entry(class_key(target)).or_default() += 1;
                }
            }
            for event in &trace.memory {
                *report.memory_histogram.entry(event.duration()).or_default() += 1;
            }
            report.distractors_tried += trace.distractors_tried as u64;
            report.distractors_removed += trace.distractors_removed as u64;
            report.relaxed += u64::from(trace.relaxed);
        }
        start = end;
    }

    let count = |w: &str| report.histogram.get(w).copied().unwrap_or(0);
    let (t, f) = (count("true"), count("false"));
    report.true_rate = ratio(t, t + f);
    for leaf in space.leaves() {
        let words: Vec<&str> = match leaf {
            OutputSpace::Bool => vec!["true", "false"],
            OutputSpace::Colors => Color::ALL.iter().map(|c| c.word()).collect(),
            OutputSpace::Shapes => Shape::ALL.iter().map(|s| s.word()).collect(),
            _ => continue,
        };
        let counts: Vec<u64> = words.iter().map(|w| count(w)).collect();
        report.chi_square.push(ChiSquareTest::uniform(leaf, &counts));
    }
    let events: u64 = report.memory_histogram.values().sum();
    let total: u64 = report.memory_histogram.iter().map(|(d, c)| *d as u64 * c).sum();
    report.mean_memory = ratio(total, events);
    report.deletion_rate = ratio(report.distractors_removed, report.distractors_tried);
    Ok(report)
}
