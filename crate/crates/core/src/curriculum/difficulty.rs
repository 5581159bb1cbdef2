//! Per-sample difficulty metrics. Lower values are easier.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::CurriculumState;
use crate::data::Sample;
use crate::error::{Error, Result};
use crate::rng::keyed_rng;

/// Guards the relative decline against a vanishing previous loss.
pub const DECLINE_EPS: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifficultyScore {
    pub sample_id: usize,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DifficultyMetric {
    Length,
    Rarity,
    Random,
    Loss,
    Decline,
    #[default]
    None,
}

impl DifficultyMetric {
    pub fn name(self) -> &'static str {
        match self {
            DifficultyMetric::Length => "length",
            DifficultyMetric::Rarity => "rarity",
            DifficultyMetric::Random => "random",
            DifficultyMetric::Loss => "loss",
            DifficultyMetric::Decline => "decline",
            DifficultyMetric::None => "none",
        }
    }
}

pub fn difficulty_length(sample: &Sample) -> DifficultyScore {
    DifficultyScore {
        sample_id: sample.id,
        value: sample.source.len() as f64,
    }
}

/// Smallest probability assigned to any source id: `1 / (2·total_tokens)`.
pub fn rarity_floor(total_tokens: usize) -> f64 {
    1.0 / (2.0 * total_tokens as f64)
}

/// `-Σ ln p(w)` over the source tokens, with every frequency raised to at
/// least `rarity_floor(total_tokens)`.
pub fn difficulty_rarity(sample: &Sample, unigram_freqs: &[f64], total_tokens: usize) -> Result<DifficultyScore> {
    let floor = if total_tokens == 0 {
        0.0
    } else {
        rarity_floor(total_tokens)
    };
    let mut value = 0.0;
    for &t in &sample.source {
        let p = unigram_freqs.get(t as usize).copied().unwrap_or(0.0).max(floor);
        if p <= 0.0 || !p.is_finite() {
            return Err(Error::invalid(format!(
                "sample {}: token {t} has zero frequency",
                sample.id
            )));
        }
        value -= p.ln();
    }
    Ok(DifficultyScore {
        sample_id: sample.id,
        value,
    })
}

/// Uniform in `[0, 1)`, keyed by `(seed, phase, sample_id)`.
pub fn difficulty_random(sample_id: usize, phase: usize, seed: u64) -> DifficultyScore {
    DifficultyScore {
        sample_id,
        value: keyed_rng(seed, phase as u64, sample_id as u64).random::<f64>(),
    }
}

/// Current-phase sentence NLL.
pub fn difficulty_loss(sample_id: usize, state: &CurriculumState) -> Result<DifficultyScore> {
    let value = state.loss_at(sample_id, 0).ok_or(Error::UnscoredSample(sample_id))?;
    Ok(DifficultyScore { sample_id, value })
}

/// Relative loss decline over the last `a` phases, negated so that a fast
/// decline scores low. Before `a` phases of history exist the raw current
/// loss is used instead.
pub fn difficulty_decline(sample_id: usize, state: &CurriculumState) -> Result<DifficultyScore> {
    let current = state.loss_at(sample_id, 0).ok_or(Error::InsufficientHistory(sample_id))?;
    let a = state.params().a;
    if state.scored_phase() < a {
        return Ok(DifficultyScore {
            sample_id,
            value: current,
        });
    }
    let previous = state.loss_at(sample_id, a).ok_or(Error::InsufficientHistory(sample_id))?;
    Ok(DifficultyScore {
        sample_id,
        value: decline_value(previous, current),
    })
}

/// `-(previous - current) / max(previous, ε)`.
pub fn decline_value(previous: f64, current: f64) -> f64 {
    -(previous - current) / previous.max(DECLINE_EPS)
}
