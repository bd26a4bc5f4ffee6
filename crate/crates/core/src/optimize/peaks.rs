use super::{LabelingState, OptimizeError, Problem};
use crate::rectify::Signal1D;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakConfig {
    /// Peaks closer than this (mm) are merged, keeping the higher one.
    pub min_separation_mm: f64,
    /// Minimum prominence as a fraction of the global maximum.
    pub min_prominence_frac: f64,
}

impl Default for PeakConfig {
    fn default() -> Self {
        PeakConfig {
            min_separation_mm: 10.0,
            min_prominence_frac: 0.1,
        }
    }
}

/// Height of a peak above the higher of the two saddles that separate it
/// from taller terrain (or from the signal ends).
fn prominence(v: &[f64], i: usize) -> f64 {
    let h = v[i];
    let mut left_min = h;
    for j in (0..i).rev() {
        if v[j] > h {
            break;
        }
        left_min = left_min.min(v[j]);
    }
    let mut right_min = h;
    for &x in &v[i + 1..] {
        if x > h {
            break;
        }
        right_min = right_min.min(x);
    }
    h - left_min.max(right_min)
}

/// Interior local maxima passing the prominence and separation filters, ascending.
///
/// A sample is a local maximum when it is `>=` both neighbours and `>` at
/// least one; the first and last samples never qualify.
pub fn find_peaks(signal: &Signal1D, cfg: &PeakConfig) -> Vec<usize> {
    let v = signal.values();
    if v.len() < 3 {
        return Vec::new();
    }
    let global = signal.max();
    if global <= 0.0 {
        return Vec::new();
    }
    let min_prom = cfg.min_prominence_frac * global;
    let mut candidates: Vec<usize> = (1..v.len() - 1)
        .filter(|&i| v[i] >= v[i - 1] && v[i] >= v[i + 1] && (v[i] > v[i - 1] || v[i] > v[i + 1]))
        .filter(|&i| prominence(v, i) >= min_prom)
        .collect();
    // strongest first; ties keep the earlier index
    candidates.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
    let sep = cfg.min_separation_mm / signal.delta();
    let mut kept: Vec<usize> = Vec::new();
    for c in candidates {
        if kept.iter().all(|&k| (k as f64 - c as f64).abs() >= sep) {
            kept.push(c);
        }
    }
    kept.sort_unstable();
    kept
}

/// Starting labeling: `v_l = 1` and one position per peak of `q_hat`.
///
/// When there are more peaks than labels, only the `v_max` strongest are kept.
pub fn init_state(problem: &Problem<'_>, q_hat: &Signal1D, cfg: &PeakConfig) -> Result<LabelingState, OptimizeError> {
    let mut peaks = find_peaks(q_hat, cfg);
    if peaks.is_empty() {
        return Err(OptimizeError::NoVertebra);
    }
    let v_max = problem.v_max();
    if peaks.len() > v_max {
        let v = q_hat.values();
        peaks.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
        peaks.truncate(v_max);
        peaks.sort_unstable();
    }
    problem.state(1, peaks.into_iter().map(|p| p as f64).collect())
}
