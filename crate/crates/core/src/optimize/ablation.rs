//! Decoders for the ablation ladder, from naive per-channel argmax up to
//! the full constrained search.

use super::{init_state, offset_op, solve, OptimizeError, Problem, SolveConfig};
use crate::rectify::SignalSet;
use crate::volume::{ActivationStack, Vec3};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Per-channel 3-D argmax.
    Base,
    /// Per-channel argmax of the rectified 1-D signal.
    Rect,
    /// Peaks of the combined signal, labeled by a single offset search.
    Order,
    /// Full iterative optimisation.
    Optim,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Base, Mode::Rect, Mode::Order, Mode::Optim];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Base => "base",
            Mode::Rect => "rect",
            Mode::Order => "order",
            Mode::Optim => "optim",
        }
    }

    /// Long name used in reports, e.g. `base+rect+optim`.
    pub fn long_name(self) -> &'static str {
        match self {
            Mode::Base => "base",
            Mode::Rect => "base+rect",
            Mode::Order => "base+rect+order",
            Mode::Optim => "base+rect+optim",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "base" => Ok(Mode::Base),
            "rect" | "base+rect" => Ok(Mode::Rect),
            "order" | "base+rect+order" => Ok(Mode::Order),
            "optim" | "base+rect+optim" => Ok(Mode::Optim),
            other => Err(format!("unknown mode '{other}' (expected base, rect, order or optim)")),
        }
    }
}

/// A labeled position on the 1-D axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detection1D {
    pub label: usize,
    pub k: f64,
    pub activation: f64,
}

/// A labeled point in world space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection3D {
    pub label: usize,
    pub center: Vec3,
    pub activation: f64,
}

/// Per-channel 3-D argmax; a channel is reported only when its maximum
/// reaches `presence_frac` of the strongest channel maximum.
pub fn decode_base(stack: &ActivationStack, presence_frac: f64) -> Vec<Detection3D> {
    let maxima: Vec<([usize; 3], f64)> = stack.channels().iter().map(|c| c.argmax()).collect();
    let global = maxima.iter().map(|m| m.1).fold(0.0, f64::max);
    if global <= 0.0 {
        return Vec::new();
    }
    maxima
        .iter()
        .enumerate()
        .filter(|(_, m)| m.1 >= presence_frac * global)
        .map(|(i, m)| Detection3D {
            label: i + 1,
            center: stack.geometry().world(m.0),
            activation: m.1,
        })
        .collect()
}

/// Decodes oriented signals with one of the rectified modes.
///
/// Returns the detections (ascending label) and, for the constrained
/// modes, the energy of the chosen labeling.
pub fn decode_1d(
    mode: Mode,
    signals: &SignalSet,
    problem: &Problem<'_>,
    cfg: &SolveConfig,
    presence_frac: f64,
) -> Result<(Vec<Detection1D>, Option<f64>), OptimizeError> {
    let state = match mode {
        Mode::Base => panic!("base mode works on the 3-D stack; use decode_base"),
        Mode::Rect => {
            let global = signals.channels.iter().map(|c| c.max()).fold(0.0, f64::max);
            if global <= 0.0 {
                return Ok((Vec::new(), None));
            }
            let dets = signals
                .channels
                .iter()
                .enumerate()
                .filter(|(_, c)| c.max() >= presence_frac * global)
                .filter_map(|(i, c)| {
                    c.argmax().map(|k| Detection1D {
                        label: i + 1,
                        k: k as f64,
                        activation: c.values()[k],
                    })
                })
                .collect();
            return Ok((dets, None));
        }
        Mode::Order => {
            let init = init_state(problem, &signals.q_hat, &cfg.peaks)?;
            offset_op(problem, &init)?
        }
        Mode::Optim => solve(problem, &signals.q_hat, cfg)?.best,
    };
    let dets = state
        .k
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let label = state.label(i);
            Detection1D {
                label,
                k,
                activation: signals.channel(label).at(k),
            }
        })
        .collect();
    Ok((dets, Some(state.energy)))
}
