use super::{check_constraints, LabelingState, OptimizeError};
use crate::labels;
use crate::rectify::Signal1D;
use serde::{Deserialize, Serialize};

/// Per-label weights and the regularizer range switch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyConfig {
    /// `lambda[v - 1]` weights label `v`.
    pub lambda: Vec<f64>,
    /// Sum the gap penalty over interior points `2..=N-2` only, leaving out
    /// the first triple. Default covers every interior point `1..=N-2`.
    pub reg_range_literal: bool,
}

impl EnergyConfig {
    pub fn with_anchors(v_max: usize, anchors: &[usize], anchor_weight: f64, base_weight: f64) -> Self {
        let lambda = (1..=v_max)
            .map(|v| if anchors.contains(&v) { anchor_weight } else { base_weight })
            .collect();
        EnergyConfig {
            lambda,
            reg_range_literal: false,
        }
    }

    /// Anchors C1, C2, S1, S2 at weight 2, everything else 1.
    pub fn anchored(v_max: usize) -> Self {
        Self::with_anchors(v_max, &labels::default_anchors(), 2.0, 1.0)
    }

    pub fn uniform(v_max: usize) -> Self {
        Self::with_anchors(v_max, &[], 1.0, 1.0)
    }

    pub fn v_max(&self) -> usize {
        self.lambda.len()
    }
}

/// Gap-similarity penalty `exp(max(a/b, b/a))`.
pub fn regularizer(a: f64, b: f64) -> Result<f64, OptimizeError> {
    if !(a > 0.0 && b > 0.0) {
        return Err(OptimizeError::Domain { a, b });
    }
    Ok(regularizer_unchecked(a, b))
}

#[inline]
pub(crate) fn regularizer_unchecked(a: f64, b: f64) -> f64 {
    (a / b).max(b / a).exp()
}

/// Per-label signals bundled with the energy weights.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub signals: &'a [Signal1D],
    pub cfg: &'a EnergyConfig,
}

impl<'a> Problem<'a> {
    pub fn new(signals: &'a [Signal1D], cfg: &'a EnergyConfig) -> Result<Self, OptimizeError> {
        if signals.len() != cfg.v_max() {
            return Err(OptimizeError::LengthMismatch(format!(
                "{} signals but {} weights",
                signals.len(),
                cfg.v_max()
            )));
        }
        let len = signals.first().map_or(0, Signal1D::len);
        if signals.iter().any(|s| s.len() != len) {
            return Err(OptimizeError::LengthMismatch("channel signals differ in length".into()));
        }
        Ok(Problem { signals, cfg })
    }

    pub fn v_max(&self) -> usize {
        self.signals.len()
    }

    /// Number of samples per signal.
    pub fn len(&self) -> usize {
        self.signals.first().map_or(0, Signal1D::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Weighted activation `λ_v Q_v(k)` for 1-based label `v`.
    #[inline]
    pub fn weighted(&self, v: usize, k: f64) -> f64 {
        self.cfg.lambda[v - 1] * self.signals[v - 1].at(k)
    }

    /// First interior index included in the regularizer sum.
    #[inline]
    pub(crate) fn reg_start(&self) -> usize {
        if self.cfg.reg_range_literal {
            2
        } else {
            1
        }
    }

    /// Energy without constraint checks; callers guarantee a valid labeling.
    pub(crate) fn energy_unchecked(&self, v_l: usize, k: &[f64]) -> f64 {
        let data: f64 = k.iter().enumerate().map(|(i, &ki)| self.weighted(v_l + i, ki)).sum();
        let n = k.len();
        let mut reg = 0.0;
        if n >= 3 {
            for i in self.reg_start()..=n - 2 {
                reg += regularizer_unchecked(k[i] - k[i - 1], k[i + 1] - k[i]);
            }
        }
        reg - data
    }

    /// Energy of labeling `(v_l, k)`; errors if it breaks a hard constraint.
    pub fn energy(&self, v_l: usize, k: &[f64]) -> Result<f64, OptimizeError> {
        check_constraints(v_l, k, self.v_max(), self.len())?;
        Ok(self.energy_unchecked(v_l, k))
    }

    /// Builds a state with its energy filled in.
    pub fn state(&self, v_l: usize, k: Vec<f64>) -> Result<LabelingState, OptimizeError> {
        let energy = self.energy(v_l, &k)?;
        Ok(LabelingState { v_l, k, energy })
    }
}
