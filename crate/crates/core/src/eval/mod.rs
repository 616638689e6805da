//! Scoring, chance levels and bias audits.

mod audit;
mod chance;
mod score;

pub use audit::{audit_bias, AuditReport, ChiSquareTest, MIN_AUDIT_EPISODES};
pub use chance::{answer_classes, catalog_chance, chance_level, simulate_chance, SimulatedChance};
pub use score::{
    cell_center, grid_cell, oracle_answers, pointing_distribution, score_answers, score_frame, Answer, Outcome,
    ScoreReport, Scorer, TaskScore, POINTING_SIGMA,
};
