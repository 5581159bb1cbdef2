//! Competence schedules: the fraction of the sorted corpus available for
//! training at a phase.

use serde::{Deserialize, Serialize};

use super::state::CurriculumState;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompetenceSchedule {
    /// Functional form with `p = 1`.
    Linear,
    /// Functional form with `p = 2`.
    Sqrt,
    /// Driven by dev BLEU relative to a baseline's best.
    Dmc,
    #[default]
    None,
}

impl CompetenceSchedule {
    pub fn name(self) -> &'static str {
        match self {
            CompetenceSchedule::Linear => "linear",
            CompetenceSchedule::Sqrt => "sqrt",
            CompetenceSchedule::Dmc => "dmc",
            CompetenceSchedule::None => "none",
        }
    }

    /// Exponent of the functional form, if this is one.
    pub fn exponent(self) -> Option<f64> {
        match self {
            CompetenceSchedule::Linear => Some(1.0),
            CompetenceSchedule::Sqrt => Some(2.0),
            _ => None,
        }
    }
}

/// `min(1, ((t/T)(1 - c0^p) + c0^p)^(1/p))`.
///
/// Requires `T > 0`, `c0 ∈ (0, 1]`, `p > 0` and `t ≥ 0`.
pub fn competence_functional(t: f64, curriculum_len: f64, c0: f64, p: f64) -> f64 {
    let c0p = c0.powf(p);
    let inner = (t / curriculum_len) * (1.0 - c0p) + c0p;
    inner.powf(1.0 / p).min(1.0)
}

/// Unclamped dynamic competence `min(1, bleu_t / (bleu_T·β) · (1 - c0) + c0)`.
pub fn dmc_raw(bleu_t: f64, bleu_cap: f64, c0: f64, beta: f64) -> f64 {
    (bleu_t / (bleu_cap * beta) * (1.0 - c0) + c0).min(1.0)
}

/// Dynamic competence for the current dev BLEU. With the monotone clamp on
/// (the default) the result never drops below the state's current
/// competence.
pub fn competence_dmc(bleu_t: f64, state: &CurriculumState) -> Result<f64> {
    let cap = state
        .bleu_cap()
        .filter(|b| *b > 0.0 && b.is_finite())
        .ok_or(Error::CurriculumLengthUnavailable)?;
    if !(bleu_t >= 0.0 && bleu_t.is_finite()) {
        return Err(Error::invalid(format!("dev BLEU {bleu_t} is not a nonnegative number")));
    }
    let params = state.params();
    let raw = dmc_raw(bleu_t, cap, params.c0, params.beta);
    Ok(if params.monotone_dmc {
        raw.max(state.competence())
    } else {
        raw
    })
}
