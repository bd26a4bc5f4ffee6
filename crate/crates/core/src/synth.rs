//! Synthetic spine phantoms: a curved spine with plausible vertebra spacing,
//! rendered as Gaussian activation channels with configurable corruption.
//!
//! World layout: image z runs caudal to cranial, so label 1 (C1) sits at
//! the highest z of the run. The spine follows
//! `x(z) = A sin(2πz/λ + φ)`, `y(z) = B sin(π (z - z_lo) / (z_hi - z_lo))`.

use crate::heatmap::{splat_gaussian, VertebraAnnotation};
use crate::labels::{self, V_MAX};
use crate::volume::{ActivationStack, Geometry, Vec3, VolumeGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("infeasible phantom: {0}")]
    Infeasible(String),
    #[error("invalid noise settings: {0}")]
    Noise(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurveSpec {
    /// Lateral (x) sinusoid amplitude, mm.
    pub amplitude_mm: f64,
    pub wavelength_mm: f64,
    pub phase_rad: f64,
    /// Half-period antero-posterior (y) bow, mm.
    pub bow_mm: f64,
}

impl Default for CurveSpec {
    fn default() -> Self {
        CurveSpec {
            amplitude_mm: 0.0,
            wavelength_mm: 400.0,
            phase_rad: 0.0,
            bow_mm: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    /// Chance that a channel fires on a neighbouring vertebra, more strongly
    /// than on its own, which keeps a random 0.5..0.8 of its amplitude so the
    /// summed map still lights every vertebra.
    pub label_shift_prob: f64,
    /// Chance that a channel is entirely blank.
    pub dropout_prob: f64,
    /// Per-axis Gaussian perturbation of every rendered blob center, mm.
    pub jitter_sigma_mm: f64,
    /// Keep only this `[lo, hi]` fraction of the volume's z extent.
    pub crop: Option<[f64; 2]>,
    /// Peak amplitude of broad random clutter blobs; 0 disables.
    pub background_noise: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            label_shift_prob: 0.0,
            dropout_prob: 0.0,
            jitter_sigma_mm: 0.0,
            crop: None,
            background_noise: 0.0,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        for (name, p) in [("label_shift_prob", self.label_shift_prob), ("dropout_prob", self.dropout_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SynthError::Noise(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if !(self.jitter_sigma_mm >= 0.0) || !(self.background_noise >= 0.0) {
            return Err(SynthError::Noise("jitter and background must be >= 0".into()));
        }
        if let Some([lo, hi]) = self.crop {
            if !(0.0 <= lo && lo < hi && hi <= 1.0) {
                return Err(SynthError::Noise(format!("crop [{lo}, {hi}] is not a sub-range of [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhantomSpec {
    pub seed: u64,
    /// First (most cranial) label of the run.
    pub start_label: usize,
    pub count: usize,
    pub v_max: usize,
    /// Gap range between neighbouring centers, mm; gaps grow caudally.
    pub gap_range_mm: [f64; 2],
    pub curve: CurveSpec,
    /// Gaussian width of rendered activations, mm.
    pub sigma_mm: f64,
    pub voxel_mm: [f64; 3],
    /// Explicit volume size; fitted around the spine when `None`.
    pub dims: Option<[usize; 3]>,
    /// Space kept beyond the outermost centers when fitting, mm.
    pub margin_mm: f64,
    pub noise: NoiseSpec,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        PhantomSpec {
            seed: 0,
            start_label: 8,
            count: 12,
            v_max: V_MAX,
            gap_range_mm: [18.0, 32.0],
            curve: CurveSpec::default(),
            sigma_mm: 4.0,
            voxel_mm: [2.0, 2.0, 2.0],
            dims: None,
            margin_mm: 30.0,
            noise: NoiseSpec::default(),
        }
    }
}

/// Options for drawing a random phantom per case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomRun {
    pub min_count: usize,
    pub max_count: usize,
    pub max_amplitude_mm: f64,
    pub wavelength_range_mm: [f64; 2],
    pub max_bow_mm: f64,
    /// Force the run to include C1 or S2 (an anchor at one end of the spine).
    pub require_anchor: bool,
}

impl Default for RandomRun {
    fn default() -> Self {
        RandomRun {
            min_count: 4,
            max_count: 20,
            max_amplitude_mm: 30.0,
            wavelength_range_mm: [300.0, 600.0],
            max_bow_mm: 10.0,
            require_anchor: false,
        }
    }
}

impl PhantomSpec {
    pub fn end_label(&self) -> usize {
        self.start_label + self.count - 1
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.count == 0 || self.start_label == 0 {
            return Err(SynthError::Infeasible("run needs start >= 1 and count >= 1".into()));
        }
        if self.end_label() > self.v_max {
            return Err(SynthError::Infeasible(format!(
                "labels {}..={} exceed {}",
                self.start_label,
                self.end_label(),
                self.v_max
            )));
        }
        let [lo, hi] = self.gap_range_mm;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(SynthError::Infeasible(format!("gap range [{lo}, {hi}] must be positive and ordered")));
        }
        if !(self.sigma_mm > 0.0) || self.voxel_mm.iter().any(|v| !(*v > 0.0)) {
            return Err(SynthError::Infeasible("sigma and voxel size must be positive".into()));
        }
        if !(self.curve.wavelength_mm > 0.0) {
            return Err(SynthError::Infeasible("wavelength must be positive".into()));
        }
        self.noise.validate()
    }

    /// A random run drawn from `seed`, keeping every other field of `self`.
    pub fn random(&self, seed: u64, opts: &RandomRun) -> PhantomSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_5b14e);
        let max_count = opts.max_count.min(self.v_max).max(1);
        let min_count = opts.min_count.clamp(1, max_count);
        let count = rng.random_range(min_count..=max_count);
        let start_label = if opts.require_anchor {
            if rng.random_bool(0.5) {
                1
            } else {
                self.v_max + 1 - count
            }
        } else {
            rng.random_range(1..=self.v_max + 1 - count)
        };
        let [wl_lo, wl_hi] = opts.wavelength_range_mm;
        let curve = CurveSpec {
            amplitude_mm: rng.random_range(0.0..=opts.max_amplitude_mm),
            wavelength_mm: if wl_hi > wl_lo { rng.random_range(wl_lo..wl_hi) } else { wl_lo },
            phase_rad: rng.random_range(0.0..std::f64::consts::TAU),
            bow_mm: rng.random_range(-opts.max_bow_mm..=opts.max_bow_mm),
        };
        PhantomSpec {
            seed,
            start_label,
            count,
            curve,
            ..self.clone()
        }
    }
}

/// The generating curve of a phantom, in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpineCurve {
    pub curve: CurveSpec,
    /// Local z extent over which the bow spans half a period.
    pub span: f64,
    /// Local-to-world translation.
    pub shift: Vec3,
}

impl SpineCurve {
    fn local(&self, z: f64) -> Vec3 {
        let c = &self.curve;
        let x = c.amplitude_mm * (std::f64::consts::TAU * z / c.wavelength_mm + c.phase_rad).sin();
        let y = c.bow_mm * (std::f64::consts::PI * (z / self.span).clamp(0.0, 1.0)).sin();
        Vec3::new(x, y, z)
    }

    /// Curve point at world height `z`.
    pub fn at(&self, z: f64) -> Vec3 {
        self.local(z - self.shift.z) + self.shift
    }
}

/// Output of [`generate`].
#[derive(Debug, Clone)]
pub struct Phantom {
    pub stack: ActivationStack,
    /// Uncorrupted centers of the vertebrae inside the field of view.
    pub truth: Vec<VertebraAnnotation>,
    pub curve: SpineCurve,
    pub spec: PhantomSpec,
}

/// Own-site amplitude of a channel that fires on a neighbour.
const OWN_AMP_RANGE: std::ops::Range<f64> = 0.5..0.8;

/// Gap between label `v` and `v + 1`, before per-case variation.
fn nominal_gap(v: usize, v_max: usize, [lo, hi]: [f64; 2]) -> f64 {
    let f = if v_max > 2 { (v - 1) as f64 / (v_max - 2) as f64 } else { 0.0 };
    lo + (hi - lo) * f
}

/// Builds the phantom. Deterministic for a fixed spec (including seed).
pub fn generate(spec: &PhantomSpec) -> Result<Phantom, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // gaps between consecutive labels of the run, growing caudally
    let mut gaps = Vec::with_capacity(spec.count.saturating_sub(1));
    let mut prev = 0.0f64;
    for v in spec.start_label..spec.end_label() {
        let g = nominal_gap(v, spec.v_max, spec.gap_range_mm) * (1.0 + rng.random_range(-0.05..=0.05));
        let g = g.clamp(spec.gap_range_mm[0], spec.gap_range_mm[1]).max(prev);
        gaps.push(g);
        prev = g;
    }

    // arc-length positions from the caudal end upward, mapped to z along the curve
    let total: f64 = gaps.iter().sum();
    let mut curve = SpineCurve {
        curve: spec.curve,
        span: total.max(1.0),
        shift: Vec3::zeros(),
    };
    let mut arc_targets = Vec::with_capacity(spec.count);
    let mut acc = 0.0;
    arc_targets.push(0.0);
    for g in gaps.iter().rev() {
        acc += g;
        arc_targets.push(acc);
    }
    let dz = 0.02;
    let mut z_of_arc = Vec::with_capacity(spec.count);
    let (mut z, mut s, mut p) = (0.0, 0.0, curve.local(0.0));
    for &target in &arc_targets {
        while s < target {
            let q = curve.local(z + dz);
            let ds = (q - p).norm();
            if s + ds >= target {
                z += dz * (target - s) / ds;
                p = curve.local(z);
                s = target;
                break;
            }
            s += ds;
            z += dz;
            p = q;
        }
        z_of_arc.push(z);
    }
    // index 0 is the caudal-most label
    let centers_local: Vec<(usize, Vec3)> = z_of_arc
        .iter()
        .enumerate()
        .map(|(i, &z)| (spec.end_label() - i, curve.local(z)))
        .collect();

    // fit or check the volume around the run
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for (_, c) in &centers_local {
        lo = lo.inf(c);
        hi = hi.sup(c);
    }
    let pad_xy = 3.0 * spec.sigma_mm + 6.0;
    let pad_z = 3.0 * spec.sigma_mm + spec.margin_mm.max(0.0);
    let lo = lo - Vec3::new(pad_xy, pad_xy, pad_z);
    let hi = hi + Vec3::new(pad_xy, pad_xy, pad_z);
    let vox = spec.voxel_mm;
    let fitted = [
        ((hi.x - lo.x) / vox[0]).ceil() as usize + 1,
        ((hi.y - lo.y) / vox[1]).ceil() as usize + 1,
        ((hi.z - lo.z) / vox[2]).ceil() as usize + 1,
    ];
    let dims = match spec.dims {
        None => fitted,
        Some(d) if (0..3).all(|a| d[a] >= fitted[a]) => d,
        Some(d) => {
            return Err(SynthError::Infeasible(format!(
                "volume {d:?} cannot hold the spine run (needs at least {fitted:?} voxels)"
            )))
        }
    };
    // center the run in the volume and put the first voxel at the world origin
    let mid = (lo + hi) * 0.5;
    let half = Vec3::new(
        0.5 * (dims[0] - 1) as f64 * vox[0],
        0.5 * (dims[1] - 1) as f64 * vox[1],
        0.5 * (dims[2] - 1) as f64 * vox[2],
    );
    curve.shift = half - mid;
    let geometry = Geometry::new(dims, vox, [0.0; 3]).map_err(|e| SynthError::Infeasible(e.to_string()))?;
    let truth_all: Vec<VertebraAnnotation> = centers_local
        .iter()
        .rev()
        .map(|&(label, c)| VertebraAnnotation {
            label,
            center: c + curve.shift,
        })
        .collect();

    let stack = render_corrupted(spec, geometry, &truth_all, &mut rng)?;
    let (stack, truth) = apply_crop(spec, stack, truth_all);
    Ok(Phantom {
        stack,
        truth,
        curve,
        spec: spec.clone(),
    })
}

fn render_corrupted(
    spec: &PhantomSpec,
    geometry: Geometry,
    truth: &[VertebraAnnotation],
    rng: &mut ChaCha8Rng,
) -> Result<ActivationStack, SynthError> {
    let noise = &spec.noise;
    let jitter = Normal::new(0.0, noise.jitter_sigma_mm.max(0.0)).expect("valid normal");
    let mut channels = vec![VolumeGrid::zeros(geometry); spec.v_max];
    let center_of = |label: usize| truth.iter().find(|a| a.label == label).map(|a| a.center);
    let jittered = |c: Vec3, rng: &mut ChaCha8Rng| {
        if noise.jitter_sigma_mm > 0.0 {
            c + Vec3::new(jitter.sample(rng), jitter.sample(rng), jitter.sample(rng))
        } else {
            c
        }
    };
    for a in truth {
        // fixed draw order per vertebra keeps streams aligned across settings
        let drop = rng.random::<f64>() < noise.dropout_prob;
        let shift = rng.random::<f64>() < noise.label_shift_prob;
        let up = rng.random_bool(0.5);
        let own_amp = rng.random_range(OWN_AMP_RANGE);
        let own_center = jittered(a.center, rng);
        if drop {
            continue;
        }
        let neighbour = if shift {
            let (first, second) = if up { (a.label.wrapping_sub(1), a.label + 1) } else { (a.label + 1, a.label.wrapping_sub(1)) };
            center_of(first).or_else(|| center_of(second))
        } else {
            None
        };
        match neighbour {
            Some(n_center) => {
                let grid = &mut channels[a.label - 1];
                splat_gaussian(grid, &own_center, spec.sigma_mm, own_amp);
                splat_gaussian(grid, &jittered(n_center, rng), spec.sigma_mm, 1.0);
            }
            None => splat_gaussian(&mut channels[a.label - 1], &own_center, spec.sigma_mm, 1.0),
        }
    }
    if noise.background_noise > 0.0 {
        let (lo, hi) = geometry.bounds();
        for grid in &mut channels {
            for _ in 0..3 {
                let p = Vec3::new(
                    rng.random_range(lo.x..=hi.x),
                    rng.random_range(lo.y..=hi.y),
                    rng.random_range(lo.z..=hi.z),
                );
                let amp = rng.random_range(0.0..=noise.background_noise);
                splat_gaussian(grid, &p, 15.0, amp);
            }
        }
    }
    let names = labels::label_names(spec.v_max);
    ActivationStack::with_labels(channels, names).map_err(|e| SynthError::Infeasible(e.to_string()))
}

fn apply_crop(
    spec: &PhantomSpec,
    mut stack: ActivationStack,
    truth: Vec<VertebraAnnotation>,
) -> (ActivationStack, Vec<VertebraAnnotation>) {
    let Some([lo, hi]) = spec.noise.crop else {
        return (stack, truth);
    };
    let g = *stack.geometry();
    let nz = g.dims[2];
    let z_lo = (lo * (nz - 1) as f64).round() as usize;
    let z_hi = (hi * (nz - 1) as f64).round() as usize;
    let plane = g.dims[0] * g.dims[1];
    for ch in stack.channels_mut() {
        let data = ch.data_mut();
        for z in (0..nz).filter(|z| *z < z_lo || *z > z_hi) {
            data[z * plane..(z + 1) * plane].fill(0.0);
        }
    }
    let (wlo, whi) = (g.origin[2] + z_lo as f64 * g.spacing[2], g.origin[2] + z_hi as f64 * g.spacing[2]);
    let truth = truth
        .into_iter()
        .filter(|a| a.center.z >= wlo && a.center.z <= whi)
        .collect();
    (stack, truth)
}
