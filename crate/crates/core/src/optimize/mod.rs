//! Anatomically constrained labeling on 1-D activation signals.
//!
//! A labeling is `(v_l, k)`: the lowest label `v_l` and strictly increasing
//! positions `k_0 < .. < k_{N-1}`, where `k_i` carries label `v_l + i`. The
//! consecutive-label constraint is built into this parameterisation; the
//! energy adds a soft penalty on uneven gaps between neighbours.
//!
//! Signals must be oriented so that increasing index runs in increasing
//! label order (cranial to caudal).

mod ablation;
mod brute;
mod energy;
mod ops;
mod peaks;
mod solve;

pub use ablation::{decode_1d, decode_base, Detection1D, Detection3D, Mode};
pub use brute::{brute_force_solve, search_space_size, DEFAULT_BUDGET};
pub use energy::{regularizer, EnergyConfig, Problem};
pub use ops::{expansion_candidate, expansion_lookahead_op, expansion_op, expansion_relabel_op, finetune_op, offset_op};
pub use peaks::{find_peaks, init_state, PeakConfig};
pub use solve::{solve, ExpansionRule, SolveConfig, SolveOutcome};

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimizeError {
    #[error("no vertebra detected: the combined signal has no qualifying local maximum")]
    NoVertebra,
    #[error("{n} vertebrae cannot be labeled with only {v_max} labels")]
    Infeasible { n: usize, v_max: usize },
    #[error("labeling violates hard constraints: {0}")]
    Constraint(String),
    #[error("regularizer needs positive gaps, got ({a}, {b})")]
    Domain { a: f64, b: f64 },
    #[error("search space of {size} states exceeds the budget of {budget}")]
    BudgetExceeded { size: f64, budget: f64 },
    #[error("signal lengths differ: {0}")]
    LengthMismatch(String),
}

/// Lowest label plus positions, with the cached energy of the owning problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelingState {
    pub v_l: usize,
    pub k: Vec<f64>,
    pub energy: f64,
}

impl LabelingState {
    pub fn n(&self) -> usize {
        self.k.len()
    }

    /// Label of position `i`.
    pub fn label(&self, i: usize) -> usize {
        self.v_l + i
    }

    pub fn labels(&self) -> std::ops::RangeInclusive<usize> {
        self.v_l..=self.v_l + self.k.len().saturating_sub(1)
    }

    /// Hard constraints: labels fit in `1..=v_max`, positions strictly increasing in `[0, len-1]`.
    pub fn check(&self, v_max: usize, len: usize) -> Result<(), OptimizeError> {
        check_constraints(self.v_l, &self.k, v_max, len)
    }
}

pub(crate) fn check_constraints(v_l: usize, k: &[f64], v_max: usize, len: usize) -> Result<(), OptimizeError> {
    if k.is_empty() {
        return Err(OptimizeError::Constraint("empty labeling".into()));
    }
    if v_l < 1 || v_l + k.len() - 1 > v_max {
        return Err(OptimizeError::Constraint(format!(
            "labels {v_l}..={} outside 1..={v_max}",
            v_l + k.len() - 1
        )));
    }
    let hi = len.saturating_sub(1) as f64;
    if let Some(bad) = k.iter().find(|&&x| !(x >= 0.0 && x <= hi)) {
        return Err(OptimizeError::Constraint(format!("position {bad} outside [0, {hi}]")));
    }
    if k.windows(2).any(|w| w[1] <= w[0]) {
        return Err(OptimizeError::Constraint(format!("positions not strictly increasing: {k:?}")));
    }
    Ok(())
}
