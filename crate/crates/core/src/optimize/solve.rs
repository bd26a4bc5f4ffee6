use super::{expansion_lookahead_op, expansion_op, expansion_relabel_op, finetune_op, init_state, offset_op, LabelingState, OptimizeError, PeakConfig, Problem};
use crate::rectify::Signal1D;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub peaks: PeakConfig,
    /// Hill-climbing step sizes in samples, largest first.
    pub step_schedule: Vec<usize>,
    pub max_iters: usize,
    pub expansion: ExpansionRule,
}

/// How the expansion step picks its insertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpansionRule {
    /// Lowest raw energy at the current lowest label.
    Literal,
    /// Lowest raw energy over insertion gap and lowest label together.
    Relabel,
    /// Like `Relabel`, but candidates are fine-tuned before comparison.
    #[default]
    Lookahead,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            peaks: PeakConfig::default(),
            step_schedule: vec![4, 2, 1],
            max_iters: 50,
            expansion: ExpansionRule::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOutcome {
    /// Lowest-energy labeling seen during the run.
    pub best: LabelingState,
    /// Energies accepted by the convergence test, one per iteration that continued.
    pub accepted: Vec<f64>,
    pub iterations: usize,
}

/// Iterative offset / fine-tune / expansion search.
///
/// Each iteration re-labels the run (offset); if that does not beat the
/// best offset energy so far the search stops. Otherwise positions are
/// refined and one vertebra is inserted at the best gap. The lowest-energy
/// state observed at any point is returned.
pub fn solve(problem: &Problem<'_>, q_hat: &Signal1D, cfg: &SolveConfig) -> Result<SolveOutcome, OptimizeError> {
    if q_hat.len() != problem.len() {
        return Err(OptimizeError::LengthMismatch(format!(
            "combined signal has {} samples, channels have {}",
            q_hat.len(),
            problem.len()
        )));
    }
    let mut state = init_state(problem, q_hat, &cfg.peaks)?;
    let mut best = state.clone();
    let mut l_min = f64::INFINITY;
    let mut accepted = Vec::new();
    let mut iterations = 0;

    let keep_best = |s: &LabelingState, best: &mut LabelingState| {
        if s.energy < best.energy {
            *best = s.clone();
        }
    };

    while iterations < cfg.max_iters {
        iterations += 1;
        state = offset_op(problem, &state)?;
        if state.energy < l_min {
            l_min = state.energy;
            accepted.push(l_min);
        } else {
            break;
        }
        keep_best(&state, &mut best);
        state = finetune_op(problem, &state, &cfg.step_schedule);
        keep_best(&state, &mut best);
        state = match cfg.expansion {
            ExpansionRule::Literal => expansion_op(problem, &state),
            ExpansionRule::Relabel => expansion_relabel_op(problem, &state),
            ExpansionRule::Lookahead => expansion_lookahead_op(problem, &state, &cfg.step_schedule),
        };
        keep_best(&state, &mut best);
    }
    debug_assert!(best.check(problem.v_max(), problem.len()).is_ok());
    Ok(SolveOutcome {
        best,
        accepted,
        iterations,
    })
}
