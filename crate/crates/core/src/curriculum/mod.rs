//! Difficulty metrics, competence schedules and phase-level selection.

pub mod competence;
pub mod difficulty;
pub mod select;
pub mod state;

pub use competence::{competence_dmc, competence_functional, dmc_raw, CompetenceSchedule};
pub use difficulty::{
    decline_value, difficulty_decline, difficulty_length, difficulty_loss, difficulty_random, difficulty_rarity,
    rarity_floor, DifficultyMetric, DifficultyScore, DECLINE_EPS,
};
pub use select::{select_subset, selection_size};
pub use state::{CurriculumParams, CurriculumState, CurriculumTrace, PhaseSelection};
