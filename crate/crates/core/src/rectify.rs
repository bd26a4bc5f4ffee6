//! Spine rectification: resampling volumes in the normal planes of the
//! centerline, and the 1-D activation signals obtained by summing each
//! rectified plane.
//!
//! Rectified voxel `(x, y, z')` (offsets `x, y` in `-m..=m`) samples the
//! source volume at `s(t_z') + δx·e1(t_z') + δy·e2(t_z')`.

use crate::centerline::{Centerline, CenterlineError};
use crate::volume::{ActivationStack, Geometry, Vec3, VolumeGrid};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectifyConfig {
    /// In-plane sampling step δ (mm).
    pub delta_mm: f64,
    /// Half-width of the resampled normal plane (mm), both axes.
    pub cross_half_extent_mm: f64,
    /// Gaussian smoothing of the 1-D signals in samples; `None` or 0 disables.
    pub smooth_sigma_samples: Option<f64>,
}

impl Default for RectifyConfig {
    fn default() -> Self {
        RectifyConfig {
            delta_mm: 1.0,
            cross_half_extent_mm: 48.0,
            smooth_sigma_samples: Some(2.0),
        }
    }
}

impl RectifyConfig {
    /// Number of in-plane samples on each side of the axis.
    pub fn half_samples(&self) -> usize {
        (self.cross_half_extent_mm / self.delta_mm + 1e-9).floor() as usize
    }
}

/// Sampled 1-D activation along the rectified spine axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal1D {
    values: Vec<f64>,
    delta: f64,
}

impl Signal1D {
    /// Panics on negative or non-finite values.
    pub fn new(values: Vec<f64>, delta: f64) -> Self {
        assert!(
            values.iter().all(|v| v.is_finite() && *v >= 0.0),
            "signal values must be finite and non-negative"
        );
        Signal1D { values, delta }
    }

    pub fn zeros(len: usize, delta: f64) -> Self {
        Signal1D {
            values: vec![0.0; len],
            delta,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sample spacing in mm.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Linear interpolation at fractional index `k`; zero outside `[0, len-1]`.
    #[inline]
    pub fn at(&self, k: f64) -> f64 {
        let n = self.values.len();
        if n == 0 || !(k >= 0.0 && k <= (n - 1) as f64) {
            return 0.0;
        }
        let i = k.floor() as usize;
        if i + 1 >= n {
            return self.values[n - 1];
        }
        let f = k - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// First index of the maximum value.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in self.values.iter().enumerate() {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| i)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn reversed(&self) -> Signal1D {
        let mut values = self.values.clone();
        values.reverse();
        Signal1D {
            values,
            delta: self.delta,
        }
    }

    /// Gaussian smoothing with the kernel renormalised where it leaves the signal.
    pub fn smoothed(&self, sigma_samples: f64) -> Signal1D {
        if !(sigma_samples > 0.0) || self.values.is_empty() {
            return self.clone();
        }
        let radius = (3.0 * sigma_samples).ceil() as isize;
        let kernel: Vec<f64> = (-radius..=radius)
            .map(|d| (-(d * d) as f64 / (2.0 * sigma_samples * sigma_samples)).exp())
            .collect();
        let n = self.values.len() as isize;
        let values = (0..n)
            .map(|i| {
                let (mut acc, mut norm) = (0.0, 0.0);
                for (j, w) in kernel.iter().enumerate() {
                    let src = i + j as isize - radius;
                    if (0..n).contains(&src) {
                        acc += w * self.values[src as usize];
                        norm += w;
                    }
                }
                acc / norm
            })
            .collect();
        Signal1D {
            values,
            delta: self.delta,
        }
    }

    pub fn add(&self, other: &Signal1D) -> Signal1D {
        assert_eq!(self.len(), other.len());
        Signal1D {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            delta: self.delta,
        }
    }
}

/// Per-label signals `Q_v` (index `v - 1`) and the combined signal `Q̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSet {
    pub channels: Vec<Signal1D>,
    pub q_hat: Signal1D,
}

impl SignalSet {
    pub fn v_max(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.q_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q_hat.is_empty()
    }

    /// Signal of 1-based label `v`.
    pub fn channel(&self, v: usize) -> &Signal1D {
        &self.channels[v - 1]
    }

    pub fn smoothed(&self, sigma_samples: f64) -> SignalSet {
        SignalSet {
            channels: self.channels.iter().map(|c| c.smoothed(sigma_samples)).collect(),
            q_hat: self.q_hat.smoothed(sigma_samples),
        }
    }

    pub fn reversed(&self) -> SignalSet {
        SignalSet {
            channels: self.channels.iter().map(Signal1D::reversed).collect(),
            q_hat: self.q_hat.reversed(),
        }
    }

    /// CSV with columns `z_index,t_mm,q_hat,q_01..q_NN`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("z_index,t_mm,q_hat");
        for v in 1..=self.v_max() {
            let _ = write!(out, ",q_{v:02}");
        }
        out.push('\n');
        for z in 0..self.len() {
            let _ = write!(out, "{z},{:.6},{:.6}", z as f64 * self.q_hat.delta(), self.q_hat.values()[z]);
            for c in &self.channels {
                let _ = write!(out, ",{:.6}", c.values()[z]);
            }
            out.push('\n');
        }
        out
    }

    /// Parses the format written by [`SignalSet::to_csv`].
    pub fn from_csv(text: &str) -> Result<SignalSet, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines.next().ok_or("empty CSV")?.split(',').map(str::trim).collect();
        if header.len() < 3 || header[0] != "z_index" || header[1] != "t_mm" || header[2] != "q_hat" {
            return Err(format!("unexpected header {header:?}"));
        }
        let v_max = header.len() - 3;
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); v_max + 1];
        let mut t = Vec::new();
        for (row, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != header.len() {
                return Err(format!("row {} has {} fields, expected {}", row + 1, fields.len(), header.len()));
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("row {}: {e}", row + 1));
            t.push(parse(fields[1])?);
            for (c, f) in fields[2..].iter().enumerate() {
                let v = parse(f)?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(format!("row {}: value {v} is not a non-negative number", row + 1));
                }
                cols[c].push(v);
            }
        }
        let delta = if t.len() >= 2 { t[1] - t[0] } else { 1.0 };
        let mut cols = cols.into_iter();
        let q_hat = Signal1D::new(cols.next().unwrap(), delta);
        let channels = cols.map(|c| Signal1D::new(c, delta)).collect();
        Ok(SignalSet { channels, q_hat })
    }
}

/// Rectified volumes: one per channel plus the rectified combined map.
#[derive(Debug, Clone, PartialEq)]
pub struct RectifiedStack {
    pub channels: Vec<VolumeGrid>,
    pub combined: VolumeGrid,
    pub delta: f64,
    pub cross_half_extent: f64,
    pub length: usize,
}

/// Geometry of a rectified grid: in-plane axes are (e1, e2) offsets, z' is sample index.
pub fn rectified_geometry(c: &Centerline, cfg: &RectifyConfig) -> Geometry {
    let m = cfg.half_samples();
    let side = 2 * m + 1;
    let off = -(m as f64) * cfg.delta_mm;
    Geometry::new([side, side, c.len()], [cfg.delta_mm, cfg.delta_mm, c.step()], [off, off, 0.0])
        .expect("rectified geometry is valid")
}

fn plane_point(c: &Centerline, z: usize, x_off: f64, y_off: f64) -> Vec3 {
    let s = &c.samples()[z];
    s.point + s.e1 * x_off + s.e2 * y_off
}

fn check_inputs(c: &Centerline, cfg: &RectifyConfig) {
    assert!(c.has_frames(), "centerline frames must be computed before rectification");
    assert!(cfg.delta_mm > 0.0 && cfg.cross_half_extent_mm > 0.0, "delta and extent must be positive");
}

/// Resamples one volume into rectified space.
pub fn rectify_grid(g: &VolumeGrid, c: &Centerline, cfg: &RectifyConfig) -> VolumeGrid {
    check_inputs(c, cfg);
    let geom = rectified_geometry(c, cfg);
    let m = cfg.half_samples() as isize;
    let side = geom.dims[0];
    let delta = cfg.delta_mm;
    let data: Vec<f64> = (0..c.len())
        .into_par_iter()
        .flat_map_iter(|z| {
            (-m..=m).flat_map(move |y| {
                (-m..=m).map(move |x| g.sample(&plane_point(c, z, delta * x as f64, delta * y as f64)))
            })
        })
        .collect();
    debug_assert_eq!(data.len(), side * side * c.len());
    VolumeGrid::new(geom, data).expect("rectified samples are finite")
}

/// Rectifies every channel and the combined map.
pub fn rectify_stack(s: &ActivationStack, c: &Centerline, cfg: &RectifyConfig) -> RectifiedStack {
    let channels = s.channels().iter().map(|g| rectify_grid(g, c, cfg)).collect();
    let combined = rectify_grid(&s.combine(), c, cfg);
    RectifiedStack {
        channels,
        combined,
        delta: cfg.delta_mm,
        cross_half_extent: cfg.cross_half_extent_mm,
        length: c.len(),
    }
}

fn plane_sums(g: &VolumeGrid, step: f64) -> Signal1D {
    let [w, h, l] = g.dims();
    let plane = w * h;
    let values = (0..l).map(|z| g.data()[z * plane..(z + 1) * plane].iter().sum()).collect();
    Signal1D::new(values, step)
}

/// Sums every rectified plane: `Q_v(z') = Σ_{x,y} G'_v(x, y, z')`.
pub fn aggregate_1d(r: &RectifiedStack, smooth_sigma_samples: Option<f64>) -> SignalSet {
    let step = r.combined.geometry().spacing[2];
    let set = SignalSet {
        channels: r.channels.iter().map(|g| plane_sums(g, step)).collect(),
        q_hat: plane_sums(&r.combined, step),
    };
    match smooth_sigma_samples {
        Some(s) if s > 0.0 => set.smoothed(s),
        _ => set,
    }
}

/// World-space axis-aligned box, expanded by one voxel, around a grid's non-zero voxels.
fn support_box(g: &VolumeGrid) -> Option<(Vec3, Vec3)> {
    let geom = g.geometry();
    g.support().map(|(lo, hi)| {
        let pad = Vec3::new(geom.spacing[0], geom.spacing[1], geom.spacing[2]);
        (geom.world(lo) - pad, geom.world(hi) + pad)
    })
}

fn boxes_overlap(a: &(Vec3, Vec3), b: &(Vec3, Vec3)) -> bool {
    (0..3).all(|i| a.0[i] <= b.1[i] && b.0[i] <= a.1[i])
}

/// Rectifies and aggregates in one pass without materialising rectified volumes.
///
/// Produces the same sums as [`rectify_stack`] followed by [`aggregate_1d`]
/// (up to summation order). Slices whose normal plane cannot reach a
/// channel's non-zero voxels are skipped for that channel.
pub fn rectified_signals(s: &ActivationStack, g_hat: &VolumeGrid, c: &Centerline, cfg: &RectifyConfig) -> SignalSet {
    check_inputs(c, cfg);
    let geom = *s.geometry();
    assert_eq!(*g_hat.geometry(), geom, "combined map geometry differs from stack");
    let m = cfg.half_samples() as isize;
    let delta = cfg.delta_mm;
    let reach = m as f64 * delta;
    let supports: Vec<Option<(Vec3, Vec3)>> = s.channels().iter().map(support_box).collect();
    let hat_support = support_box(g_hat);
    let v_max = s.v_max();

    let rows: Vec<(f64, Vec<f64>)> = (0..c.len())
        .into_par_iter()
        .map(|z| {
            let mut q = vec![0.0; v_max];
            let Some(hat_box) = hat_support else {
                return (0.0, q);
            };
            let smp = &c.samples()[z];
            let ext = (smp.e1.abs() + smp.e2.abs()) * reach;
            let plane_box = (smp.point - ext, smp.point + ext);
            if !boxes_overlap(&plane_box, &hat_box) {
                return (0.0, q);
            }
            let active: Vec<usize> = supports
                .iter()
                .enumerate()
                .filter_map(|(v, b)| b.filter(|b| boxes_overlap(&plane_box, b)).map(|_| v))
                .collect();
            let mut qh = 0.0;
            for y in -m..=m {
                for x in -m..=m {
                    let p = plane_point(c, z, delta * x as f64, delta * y as f64);
                    let Some(st) = geom.stencil(&p) else { continue };
                    qh += g_hat.sample_stencil(&st);
                    for &v in &active {
                        q[v] += s.channels()[v].sample_stencil(&st);
                    }
                }
            }
            (qh, q)
        })
        .collect();

    let step = c.step();
    let q_hat = Signal1D::new(rows.iter().map(|r| r.0.max(0.0)).collect(), step);
    let channels = (0..v_max)
        .map(|v| Signal1D::new(rows.iter().map(|r| r.1[v].max(0.0)).collect(), step))
        .collect();
    let set = SignalSet { channels, q_hat };
    match cfg.smooth_sigma_samples {
        Some(sig) if sig > 0.0 => set.smoothed(sig),
        _ => set,
    }
}

/// World position of rectified axis coordinate `z_prime` (fractional sample index).
pub fn map_back(z_prime: f64, c: &Centerline) -> Result<Vec3, CenterlineError> {
    c.point_at(z_prime)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centerline::from_uniform_points;
    use crate::heatmap::splat_gaussian;

    fn straight_centerline(x: f64, y: f64, z0: f64, n: usize, step: f64) -> Centerline {
        from_uniform_points((0..n).map(|i| Vec3::new(x, y, z0 + i as f64 * step)).collect(), step).unwrap()
    }

    #[test]
    fn straight_centerline_is_identity_warp() {
        let g = Geometry::new([15, 15, 20], [1.0; 3], [0.0; 3]).unwrap();
        let grid = VolumeGrid::from_world_fn(g, |p| (p.x * 0.3).sin().abs() + p.y * 0.1 + p.z * 0.05).unwrap();
        let c = straight_centerline(7.0, 7.0, 0.0, 20, 1.0);
        let cfg = RectifyConfig {
            delta_mm: 1.0,
            cross_half_extent_mm: 5.0,
            smooth_sigma_samples: None,
        };
        let r = rectify_grid(&grid, &c, &cfg);
        assert_eq!(r.dims(), [11, 11, 20]);
        let mut max_diff = 0.0f64;
        for z in 0..20 {
            for y in 0..11 {
                for x in 0..11 {
                    let d = (r.get(x, y, z) - grid.get(x + 2, y + 2, z)).abs();
                    max_diff = max_diff.max(d);
                }
            }
        }
        assert!(max_diff < 1e-6, "max diff {max_diff}");
    }

    #[test]
    fn blob_on_centerline_maps_to_axis() {
        let g = Geometry::new([21, 21, 41], [1.0; 3], [-10.0, -10.0, 0.0]).unwrap();
        let mut grid = VolumeGrid::zeros(g);
        splat_gaussian(&mut grid, &Vec3::new(0.0, 0.0, 17.0), 3.0, 1.0);
        let c = straight_centerline(0.0, 0.0, 0.0, 41, 1.0);
        let cfg = RectifyConfig {
            delta_mm: 1.0,
            cross_half_extent_mm: 6.0,
            smooth_sigma_samples: None,
        };
        let r = rectify_grid(&grid, &c, &cfg);
        assert_eq!(r.argmax().0, [6, 6, 17]);
    }

    #[test]
    fn signal_interpolation_and_smoothing() {
        let s = Signal1D::new(vec![0.0, 2.0, 4.0, 0.0], 1.0);
        assert_eq!(s.at(0.5), 1.0);
        assert_eq!(s.at(3.0), 0.0);
        assert_eq!(s.at(-1.0), 0.0);
        assert_eq!(s.argmax(), Some(2));
        let sm = s.smoothed(1.0);
        assert!((sm.sum() - s.sum()).abs() < 2.0);
        assert!(sm.values().iter().all(|v| *v >= 0.0));
        // symmetric bump keeps its peak
        let bump = Signal1D::new((0..21).map(|i| (-((i as f64 - 10.0).powi(2)) / 8.0).exp()).collect(), 1.0);
        assert_eq!(bump.smoothed(2.0).argmax(), Some(10));
    }

    #[test]
    fn signal_csv_round_trip() {
        let set = SignalSet {
            channels: vec![
                Signal1D::new(vec![0.0, 1.0, 0.5], 1.0),
                Signal1D::new(vec![2.0, 0.0, 0.25], 1.0),
            ],
            q_hat: Signal1D::new(vec![2.0, 1.0, 0.75], 1.0),
        };
        let csv = set.to_csv();
        assert!(csv.starts_with("z_index,t_mm,q_hat,q_01,q_02\n"));
        assert_eq!(SignalSet::from_csv(&csv).unwrap(), set);
        assert!(SignalSet::from_csv("a,b\n1,2").is_err());
    }

    #[test]
    fn map_back_range() {
        let c = straight_centerline(1.0, 2.0, 3.0, 10, 1.0);
        assert_eq!(map_back(0.0, &c).unwrap(), Vec3::new(1.0, 2.0, 3.0));
        assert_eq!(map_back(4.0, &c).unwrap(), Vec3::new(1.0, 2.0, 7.0));
        assert!(map_back(9.5, &c).is_err());
    }
}
