//! Run configuration, loadable from a flat TOML file.
//!
//! ```toml
//! mode = "optim"
//! delta = 1.0
//! cross_half_extent = 48.0
//! sigma_smooth = 2.0
//! anchor_weight = 2.0
//! step_schedule = [4, 2, 1]
//! ```

use crate::centerline::CenterlineConfig;
use crate::labels;
use crate::optimize::{EnergyConfig, ExpansionRule, Mode, PeakConfig, SolveConfig};
use crate::rectify::RectifyConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid value for {key}: {message}")]
    Invalid { key: &'static str, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    /// Worker threads for batch runs.
    pub jobs: usize,

    pub centerline_threshold: f64,
    pub centerline_step: f64,
    pub smooth_window: usize,
    pub centerline_extend: f64,

    pub delta: f64,
    pub cross_half_extent: f64,
    /// 1-D Gaussian smoothing in samples; 0 disables.
    pub sigma_smooth: f64,

    pub peak_separation_mm: f64,
    pub peak_prominence: f64,

    pub anchor_labels: Vec<String>,
    pub anchor_weight: f64,
    pub base_weight: f64,
    pub reg_range_literal: bool,
    pub step_schedule: Vec<usize>,
    pub max_iters: usize,
    pub expansion: ExpansionRule,

    /// Channel presence threshold of the naive decoders, relative to the strongest channel.
    pub presence_frac: f64,
    /// Image z increases towards the head.
    pub cranial_at_high_z: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let c = CenterlineConfig::default();
        let r = RectifyConfig::default();
        let p = PeakConfig::default();
        let s = SolveConfig::default();
        RunConfig {
            mode: Mode::Optim,
            seed: 0,
            jobs: 1,
            centerline_threshold: c.threshold,
            centerline_step: c.step_mm,
            smooth_window: c.smooth_window,
            centerline_extend: c.extend_mm,
            delta: r.delta_mm,
            cross_half_extent: r.cross_half_extent_mm,
            sigma_smooth: r.smooth_sigma_samples.unwrap_or(0.0),
            peak_separation_mm: p.min_separation_mm,
            peak_prominence: p.min_prominence_frac,
            anchor_labels: labels::default_anchors()
                .into_iter()
                .map(|v| labels::label_name(v).unwrap().to_string())
                .collect(),
            anchor_weight: 2.0,
            base_weight: 1.0,
            reg_range_literal: false,
            step_schedule: s.step_schedule,
            max_iters: s.max_iters,
            expansion: s.expansion,
            presence_frac: 0.3,
            cranial_at_high_z: true,
        }
    }
}

fn positive(key: &'static str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::Invalid {
            key,
            message: format!("{v} must be positive"),
        })
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("centerline_threshold", self.centerline_threshold)?;
        positive("centerline_step", self.centerline_step)?;
        positive("delta", self.delta)?;
        positive("cross_half_extent", self.cross_half_extent)?;
        positive("peak_separation_mm", self.peak_separation_mm)?;
        positive("anchor_weight", self.anchor_weight)?;
        positive("base_weight", self.base_weight)?;
        if !(self.sigma_smooth >= 0.0) {
            return Err(ConfigError::Invalid {
                key: "sigma_smooth",
                message: "must be >= 0".into(),
            });
        }
        if !(0.0..1.0).contains(&self.peak_prominence) {
            return Err(ConfigError::Invalid {
                key: "peak_prominence",
                message: format!("{} outside [0, 1)", self.peak_prominence),
            });
        }
        if !(0.0..=1.0).contains(&self.presence_frac) {
            return Err(ConfigError::Invalid {
                key: "presence_frac",
                message: format!("{} outside [0, 1]", self.presence_frac),
            });
        }
        if self.step_schedule.is_empty() || self.step_schedule.contains(&0) {
            return Err(ConfigError::Invalid {
                key: "step_schedule",
                message: "needs at least one positive step".into(),
            });
        }
        if self.max_iters == 0 {
            return Err(ConfigError::Invalid {
                key: "max_iters",
                message: "must be >= 1".into(),
            });
        }
        if self.jobs == 0 {
            return Err(ConfigError::Invalid {
                key: "jobs",
                message: "must be >= 1".into(),
            });
        }
        self.anchors()?;
        Ok(())
    }

    pub fn anchors(&self) -> Result<Vec<usize>, ConfigError> {
        self.anchor_labels
            .iter()
            .map(|name| {
                labels::parse_label(name).ok_or_else(|| ConfigError::Invalid {
                    key: "anchor_labels",
                    message: format!("unknown label '{name}'"),
                })
            })
            .collect()
    }

    pub fn centerline(&self) -> CenterlineConfig {
        CenterlineConfig {
            threshold: self.centerline_threshold,
            step_mm: self.centerline_step,
            smooth_window: self.smooth_window,
            extend_mm: self.centerline_extend,
        }
    }

    pub fn rectify(&self) -> RectifyConfig {
        RectifyConfig {
            delta_mm: self.delta,
            cross_half_extent_mm: self.cross_half_extent,
            smooth_sigma_samples: (self.sigma_smooth > 0.0).then_some(self.sigma_smooth),
        }
    }

    pub fn energy(&self, v_max: usize) -> EnergyConfig {
        let anchors = self.anchors().unwrap_or_default();
        EnergyConfig {
            reg_range_literal: self.reg_range_literal,
            ..EnergyConfig::with_anchors(v_max, &anchors, self.anchor_weight, self.base_weight)
        }
    }

    pub fn solve(&self) -> SolveConfig {
        SolveConfig {
            peaks: PeakConfig {
                min_separation_mm: self.peak_separation_mm,
                min_prominence_frac: self.peak_prominence,
            },
            step_schedule: self.step_schedule.clone(),
            max_iters: self.max_iters,
            expansion: self.expansion,
        }
    }
}
