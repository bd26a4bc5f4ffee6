//! End-to-end inference: activation stack in, labeled vertebra centers out.

use crate::centerline::{extract_centerline, Centerline, CenterlineError};
use crate::config::RunConfig;
use crate::metrics::VertebraPrediction;
use crate::optimize::{decode_1d, decode_base, Mode, OptimizeError, Problem};
use crate::rectify::{rectified_signals, SignalSet};
use crate::volume::ActivationStack;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("centerline: {0}")]
    Centerline(#[from] CenterlineError),
    #[error("optimization: {0}")]
    Optimize(#[from] OptimizeError),
}

impl PipelineError {
    /// Nothing to label: no centerline could be traced or no peak was found.
    pub fn is_no_vertebra(&self) -> bool {
        matches!(
            self,
            PipelineError::Centerline(CenterlineError::Undefined { .. }) | PipelineError::Optimize(OptimizeError::NoVertebra)
        )
    }
}

/// Centerline and 1-D signals of one case.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub centerline: Centerline,
    /// Signals indexed along the centerline (increasing image z).
    pub signals: SignalSet,
    /// Signals oriented cranial to caudal, as the labeler expects.
    pub oriented: SignalSet,
    cranial_at_high_z: bool,
}

impl Prepared {
    /// Centerline sample index of an oriented position.
    pub fn centerline_index(&self, k: f64) -> f64 {
        if self.cranial_at_high_z {
            (self.centerline.len() - 1) as f64 - k
        } else {
            k
        }
    }
}

#[derive(Debug, Clone)]
pub struct Inference {
    pub mode: Mode,
    /// Ascending label order.
    pub predictions: Vec<VertebraPrediction>,
    pub energy: Option<f64>,
    pub anatomically_plausible: bool,
}

pub struct Pipeline {
    cfg: RunConfig,
}

impl Pipeline {
    pub fn new(cfg: RunConfig) -> Self {
        Pipeline { cfg }
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    /// Combined map, centerline, rectified 1-D signals.
    pub fn prepare(&self, stack: &ActivationStack) -> Result<Prepared, PipelineError> {
        let g_hat = stack.combine();
        let centerline = extract_centerline(&g_hat, &self.cfg.centerline())?;
        let signals = rectified_signals(stack, &g_hat, &centerline, &self.cfg.rectify());
        let oriented = if self.cfg.cranial_at_high_z {
            signals.reversed()
        } else {
            signals.clone()
        };
        Ok(Prepared {
            centerline,
            signals,
            oriented,
            cranial_at_high_z: self.cfg.cranial_at_high_z,
        })
    }

    /// Decodes with `mode`, reusing `prepared` for the rectified modes.
    pub fn decode(&self, stack: &ActivationStack, prepared: &Prepared, mode: Mode) -> Result<Inference, PipelineError> {
        if mode == Mode::Base {
            return Ok(self.decode_base(stack));
        }
        let energy_cfg = self.cfg.energy(stack.v_max());
        let problem = Problem::new(&prepared.oriented.channels, &energy_cfg)?;
        let (dets, energy) = decode_1d(mode, &prepared.oriented, &problem, &self.cfg.solve(), self.cfg.presence_frac)?;
        let mut predictions = dets
            .iter()
            .map(|d| {
                let center = prepared.centerline.point_at(prepared.centerline_index(d.k))?;
                Ok(VertebraPrediction {
                    label: d.label,
                    center,
                    activation: d.activation,
                })
            })
            .collect::<Result<Vec<_>, CenterlineError>>()?;
        predictions.sort_by_key(|p| p.label);
        let anatomically_plausible = self.plausible(&predictions);
        Ok(Inference {
            mode,
            predictions,
            energy,
            anatomically_plausible,
        })
    }

    fn decode_base(&self, stack: &ActivationStack) -> Inference {
        let predictions: Vec<VertebraPrediction> = decode_base(stack, self.cfg.presence_frac)
            .into_iter()
            .map(|d| VertebraPrediction {
                label: d.label,
                center: d.center,
                activation: d.activation,
            })
            .collect();
        let anatomically_plausible = self.plausible(&predictions);
        Inference {
            mode: Mode::Base,
            predictions,
            energy: None,
            anatomically_plausible,
        }
    }

    /// Runs one mode end to end.
    pub fn run(&self, stack: &ActivationStack, mode: Mode) -> Result<Inference, PipelineError> {
        if mode == Mode::Base {
            return Ok(self.decode_base(stack));
        }
        let prepared = self.prepare(stack)?;
        self.decode(stack, &prepared, mode)
    }

    /// Labels are consecutive and ordered head to tail in space.
    pub fn plausible(&self, predictions: &[VertebraPrediction]) -> bool {
        anatomically_plausible(predictions, self.cfg.cranial_at_high_z)
    }
}

/// Consecutive labels whose centers move monotonically towards the feet.
pub fn anatomically_plausible(predictions: &[VertebraPrediction], cranial_at_high_z: bool) -> bool {
    let mut sorted: Vec<&VertebraPrediction> = predictions.iter().collect();
    sorted.sort_by_key(|p| p.label);
    sorted.windows(2).all(|w| {
        let dz = w[1].center.z - w[0].center.z;
        w[1].label == w[0].label + 1 && if cranial_at_high_z { dz < 0.0 } else { dz > 0.0 }
    })
}
