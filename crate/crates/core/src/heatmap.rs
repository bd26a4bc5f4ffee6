//! Gaussian activation maps rendered from vertebra center annotations.

use crate::labels;
use crate::volume::{ActivationStack, Geometry, Vec3, VolumeError, VolumeGrid};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Default isotropic Gaussian width in mm.
pub const DEFAULT_SIGMA_MM: f64 = 8.0;
/// Gaussians are cut to exact zero beyond this many sigmas.
pub const TRUNCATE_SIGMAS: f64 = 3.0;

/// A labeled vertebra center in world mm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertebraAnnotation {
    pub label: usize,
    pub center: Vec3,
}

/// JSON record: `{"label", "label_name", "x_mm", "y_mm", "z_mm"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub label: usize,
    #[serde(default)]
    pub label_name: String,
    pub x_mm: f64,
    pub y_mm: f64,
    pub z_mm: f64,
}

impl From<&VertebraAnnotation> for AnnotationRecord {
    fn from(a: &VertebraAnnotation) -> Self {
        AnnotationRecord {
            label: a.label,
            label_name: labels::label_name(a.label).unwrap_or_default().to_string(),
            x_mm: a.center.x,
            y_mm: a.center.y,
            z_mm: a.center.z,
        }
    }
}

impl From<&AnnotationRecord> for VertebraAnnotation {
    fn from(r: &AnnotationRecord) -> Self {
        VertebraAnnotation {
            label: r.label,
            center: Vec3::new(r.x_mm, r.y_mm, r.z_mm),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HeatmapError {
    #[error("sigma must be positive and finite, got {0}")]
    BadSigma(f64),
    #[error("label {label} outside 1..={v_max}")]
    InvalidLabel { label: usize, v_max: usize },
    #[error("label {0} annotated more than once")]
    DuplicateLabel(usize),
    #[error("labels are not a consecutive run: {0:?}")]
    NotConsecutive(Vec<usize>),
    #[error(transparent)]
    Volume(#[from] VolumeError),
    #[error("annotation file {path}: {message}")]
    File { path: String, message: String },
}

/// Non-fatal findings from [`render_gaussians`].
#[derive(Debug, Clone, PartialEq)]
pub enum RenderWarning {
    /// The center lies outside the voxel hull; only the tail inside the grid is rendered.
    CenterOutsideGrid { label: usize },
}

/// Checks the ground-truth invariant: unique labels forming one consecutive run.
pub fn validate_annotations(annotations: &[VertebraAnnotation], v_max: usize) -> Result<(), HeatmapError> {
    let mut labels: Vec<usize> = annotations.iter().map(|a| a.label).collect();
    labels.sort_unstable();
    for &label in &labels {
        if !(1..=v_max).contains(&label) {
            return Err(HeatmapError::InvalidLabel { label, v_max });
        }
    }
    if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
        return Err(HeatmapError::DuplicateLabel(w[0]));
    }
    if labels.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(HeatmapError::NotConsecutive(labels));
    }
    Ok(())
}

/// Adds `amplitude * exp(-|p - center|^2 / 2 sigma^2)` to `grid`, truncated at 3 sigma.
pub fn splat_gaussian(grid: &mut VolumeGrid, center: &Vec3, sigma: f64, amplitude: f64) {
    let g = *grid.geometry();
    let radius = TRUNCATE_SIGMAS * sigma;
    let c = g.continuous_index(center);
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for a in 0..3 {
        let r = radius / g.spacing[a];
        let l = (c[a] - r).ceil().max(0.0);
        let h = (c[a] + r).floor().min((g.dims[a] - 1) as f64);
        if l > h {
            return;
        }
        lo[a] = l as usize;
        hi[a] = h as usize;
    }
    let inv = 1.0 / (2.0 * sigma * sigma);
    let r2 = radius * radius;
    let data = grid.data_mut();
    for z in lo[2]..=hi[2] {
        for y in lo[1]..=hi[1] {
            for x in lo[0]..=hi[0] {
                let d2 = (g.world([x, y, z]) - center).norm_squared();
                if d2 <= r2 {
                    data[g.index(x, y, z)] += amplitude * (-d2 * inv).exp();
                }
            }
        }
    }
}

/// Renders one channel per label; unannotated labels stay zero.
pub fn render_gaussians(
    annotations: &[VertebraAnnotation],
    geometry: Geometry,
    sigma: f64,
    v_max: usize,
) -> Result<(ActivationStack, Vec<RenderWarning>), HeatmapError> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(HeatmapError::BadSigma(sigma));
    }
    let mut seen = vec![false; v_max + 1];
    for a in annotations {
        if !(1..=v_max).contains(&a.label) {
            return Err(HeatmapError::InvalidLabel {
                label: a.label,
                v_max,
            });
        }
        if std::mem::replace(&mut seen[a.label], true) {
            return Err(HeatmapError::DuplicateLabel(a.label));
        }
    }
    let mut stack = ActivationStack::zeros(geometry, v_max)?;
    let mut warnings = Vec::new();
    for a in annotations {
        if !geometry.contains(&a.center) {
            warnings.push(RenderWarning::CenterOutsideGrid { label: a.label });
        }
        splat_gaussian(&mut stack.channels_mut()[a.label - 1], &a.center, sigma, 1.0);
    }
    Ok((stack, warnings))
}

pub fn write_annotations(annotations: &[VertebraAnnotation], path: impl AsRef<Path>) -> Result<(), HeatmapError> {
    let path = path.as_ref();
    let records: Vec<AnnotationRecord> = annotations.iter().map(AnnotationRecord::from).collect();
    let text = serde_json::to_string_pretty(&records).expect("annotations serialize");
    std::fs::write(path, text).map_err(|e| HeatmapError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn read_annotations(path: impl AsRef<Path>) -> Result<Vec<VertebraAnnotation>, HeatmapError> {
    let path = path.as_ref();
    let err = |message: String| HeatmapError::File {
        path: path.display().to_string(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    let records: Vec<AnnotationRecord> = serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
    Ok(records.iter().map(VertebraAnnotation::from).collect())
}
