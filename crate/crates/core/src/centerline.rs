//! Spine centerline: traced from the combined activation map, resampled to
//! uniform arc length and equipped with moving frames.
//!
//! Frames follow this convention at every sample:
//! `e3` is the unit tangent (pointing towards increasing image z),
//! `e2` is the unit vector of the normal plane closest to the image y axis,
//! `e1 = e2 × e3`.

use crate::volume::{Vec3, VolumeGrid};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// |e3 · y| above this means the tangent is within 1 degree of the y axis.
const DEGENERATE_COS: f64 = 0.999_847_695_156_391_2;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CenterlineError {
    #[error("only {slices} axial slice(s) exceed the threshold {threshold}; need at least 2")]
    Undefined { slices: usize, threshold: f64 },
    #[error("polyline needs at least 2 points, got {0}")]
    TooShort(usize),
    #[error("step must be positive, got {0}")]
    BadStep(f64),
    #[error("arc-length position {z} outside [0, {max}]")]
    OutOfRange { z: f64, max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterlineConfig {
    pub threshold: f64,
    pub step_mm: f64,
    pub smooth_window: usize,
    /// Straight extension past both traced ends, mm. Thresholding stops the
    /// trace inside the end vertebrae, which would cut their 1-D peaks in half.
    pub extend_mm: f64,
}

impl Default for CenterlineConfig {
    fn default() -> Self {
        CenterlineConfig {
            threshold: 0.5,
            step_mm: 1.0,
            smooth_window: 11,
            extend_mm: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterlineSample {
    pub t: f64,
    pub point: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
    pub e3: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Centerline {
    samples: Vec<CenterlineSample>,
    step: f64,
    has_frames: bool,
}

impl Centerline {
    pub fn samples(&self) -> &[CenterlineSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn has_frames(&self) -> bool {
        self.has_frames
    }

    pub fn length_mm(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    /// Point at fractional sample index `z`, linearly interpolated.
    pub fn point_at(&self, z: f64) -> Result<Vec3, CenterlineError> {
        let max = (self.samples.len() - 1) as f64;
        if !(z >= 0.0 && z <= max) {
            return Err(CenterlineError::OutOfRange { z, max });
        }
        let i = (z.floor() as usize).min(self.samples.len().saturating_sub(2));
        let f = z - i as f64;
        let a = self.samples[i].point;
        if f == 0.0 {
            return Ok(a);
        }
        let b = self.samples[i + 1].point;
        Ok(a + (b - a) * f)
    }

    /// One row per sample: `t,px,py,pz,e1x,e1y,e1z,e2x,e2y,e2z,e3x,e3y,e3z`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,px,py,pz,e1x,e1y,e1z,e2x,e2y,e2z,e3x,e3y,e3z\n");
        for s in &self.samples {
            let _ = write!(out, "{:.6}", s.t);
            for v in [s.point, s.e1, s.e2, s.e3] {
                let _ = write!(out, ",{:.6},{:.6},{:.6}", v.x, v.y, v.z);
            }
            out.push('\n');
        }
        out
    }
}

/// Mass centers of the supra-threshold voxels of every axial slice, ordered by z.
///
/// Slices without a voxel above `threshold` are skipped, so the polyline
/// bridges gaps by joining the neighbouring mass centers.
pub fn trace_centerline(g_hat: &VolumeGrid, threshold: f64) -> Result<Vec<Vec3>, CenterlineError> {
    let geom = g_hat.geometry();
    let [w, h, l] = geom.dims;
    let data = g_hat.data();
    let mut points = Vec::new();
    for z in 0..l {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for y in 0..h {
            let row = geom.index(0, y, z);
            for (x, &v) in data[row..row + w].iter().enumerate() {
                if v > threshold {
                    sx += x as f64;
                    sy += y as f64;
                    n += 1;
                }
            }
        }
        if n > 0 {
            let n = n as f64;
            points.push(Vec3::new(
                geom.origin[0] + sx / n * geom.spacing[0],
                geom.origin[1] + sy / n * geom.spacing[1],
                geom.origin[2] + z as f64 * geom.spacing[2],
            ));
        }
    }
    if points.len() < 2 {
        return Err(CenterlineError::Undefined {
            slices: points.len(),
            threshold,
        });
    }
    Ok(points)
}

/// Centered moving average; the window shrinks symmetrically near the ends
/// so both endpoints are kept as they are.
pub fn moving_average(points: &[Vec3], window: usize) -> Vec<Vec3> {
    let half = window / 2;
    let n = points.len();
    (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            let sum: Vec3 = points[i - h..=i + h].iter().sum();
            sum / (2 * h + 1) as f64
        })
        .collect()
}

/// Smooths the polyline, then walks it emitting points exactly `step` apart
/// (Euclidean), so `t_i = i * step` is also the summed chord length.
pub fn resample_and_smooth(polyline: &[Vec3], step: f64, smooth_window: usize) -> Result<Centerline, CenterlineError> {
    if polyline.len() < 2 {
        return Err(CenterlineError::TooShort(polyline.len()));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(CenterlineError::BadStep(step));
    }
    let mut pts = moving_average(polyline, smooth_window);
    if pts[pts.len() - 1].z < pts[0].z {
        pts.reverse();
    }
    // drop consecutive duplicates so every segment has a direction
    pts.dedup_by(|b, a| (*b - *a).norm() < 1e-12);
    if pts.len() < 2 {
        return Err(CenterlineError::TooShort(pts.len()));
    }

    let mut out = vec![pts[0]];
    let mut cur = pts[0];
    let mut seg = 0usize;
    let mut seg_start = pts[0];
    'walk: loop {
        for j in seg..pts.len() - 1 {
            let a = if j == seg { seg_start } else { pts[j] };
            let b = pts[j + 1];
            if (b - cur).norm() < step {
                continue;
            }
            // exit point of the sphere |p - cur| = step on segment a..b
            let d = b - a;
            let f = a - cur;
            let qa = d.norm_squared();
            let qb = 2.0 * f.dot(&d);
            let qc = f.norm_squared() - step * step;
            let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
            let s = ((-qb + disc.sqrt()) / (2.0 * qa)).clamp(0.0, 1.0);
            cur = a + d * s;
            seg = j;
            seg_start = cur;
            out.push(cur);
            continue 'walk;
        }
        let last = pts[pts.len() - 1];
        if (last - cur).norm() >= step * (1.0 - 1e-9) {
            out.push(last);
        }
        break;
    }
    if out.len() < 2 {
        return Err(CenterlineError::TooShort(out.len()));
    }
    let samples = out
        .into_iter()
        .enumerate()
        .map(|(i, point)| CenterlineSample {
            t: i as f64 * step,
            point,
            e1: Vec3::zeros(),
            e2: Vec3::zeros(),
            e3: Vec3::zeros(),
        })
        .collect();
    Ok(Centerline {
        samples,
        step,
        has_frames: false,
    })
}

fn project_to_plane(v: &Vec3, normal: &Vec3) -> Vec3 {
    v - normal * v.dot(normal)
}

/// Fills `e1, e2, e3` at every sample.
pub fn compute_frames(mut c: Centerline) -> Centerline {
    let n = c.samples.len();
    assert!(n >= 2, "compute_frames needs at least 2 samples");
    let y_axis = Vec3::y();
    let mut prev_e2: Option<Vec3> = None;
    for i in 0..n {
        let (a, b) = match i {
            0 => (0, 1),
            i if i == n - 1 => (n - 2, n - 1),
            i => (i - 1, i + 1),
        };
        let e3 = (c.samples[b].point - c.samples[a].point).normalize();
        let e2 = if e3.dot(&y_axis).abs() > DEGENERATE_COS {
            let reference = prev_e2.unwrap_or_else(Vec3::x);
            project_to_plane(&reference, &e3).normalize()
        } else {
            project_to_plane(&y_axis, &e3).normalize()
        };
        let e1 = e2.cross(&e3);
        let s = &mut c.samples[i];
        s.e1 = e1;
        s.e2 = e2;
        s.e3 = e3;
        prev_e2 = Some(e2);
    }
    c.has_frames = true;
    c
}

/// Trace, smooth, resample and attach frames in one go.
pub fn extract_centerline(g_hat: &VolumeGrid, cfg: &CenterlineConfig) -> Result<Centerline, CenterlineError> {
    let raw = trace_centerline(g_hat, cfg.threshold)?;
    let c = resample_and_smooth(&raw, cfg.step_mm, cfg.smooth_window)?;
    Ok(compute_frames(extend_ends(c, cfg.extend_mm)))
}

/// Adds `round(extend_mm / step)` samples on both ends along the end
/// directions (averaged over up to 5 steps), keeping the uniform spacing.
pub fn extend_ends(c: Centerline, extend_mm: f64) -> Centerline {
    let extra = if extend_mm.is_finite() && extend_mm > 0.0 { (extend_mm / c.step).round() as usize } else { 0 };
    let n = c.samples.len();
    if extra == 0 || n < 2 {
        return c;
    }
    let span = (n - 1).min(5);
    let pts: Vec<Vec3> = c.samples.iter().map(|s| s.point).collect();
    let head_dir = (pts[0] - pts[span]).normalize();
    let tail_dir = (pts[n - 1] - pts[n - 1 - span]).normalize();
    let mut out: Vec<Vec3> = (1..=extra).rev().map(|j| pts[0] + head_dir * (j as f64 * c.step)).collect();
    out.extend_from_slice(&pts);
    out.extend((1..=extra).map(|j| pts[n - 1] + tail_dir * (j as f64 * c.step)));
    let samples = out
        .into_iter()
        .enumerate()
        .map(|(i, point)| CenterlineSample {
            t: i as f64 * c.step,
            point,
            e1: Vec3::zeros(),
            e2: Vec3::zeros(),
            e3: Vec3::zeros(),
        })
        .collect();
    Centerline {
        samples,
        step: c.step,
        has_frames: false,
    }
}

/// Builds a framed centerline from points that are already uniformly spaced.
pub fn from_uniform_points(points: Vec<Vec3>, step: f64) -> Result<Centerline, CenterlineError> {
    if points.len() < 2 {
        return Err(CenterlineError::TooShort(points.len()));
    }
    let samples = points
        .into_iter()
        .enumerate()
        .map(|(i, point)| CenterlineSample {
            t: i as f64 * step,
            point,
            e1: Vec3::zeros(),
            e2: Vec3::zeros(),
            e3: Vec3::zeros(),
        })
        .collect();
    Ok(compute_frames(Centerline {
        samples,
        step,
        has_frames: false,
    }))
}
