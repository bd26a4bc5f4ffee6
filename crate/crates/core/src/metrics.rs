//! Identification rate and localization error.
//!
//! A ground-truth vertebra counts as identified when the prediction with the
//! same label exists, the two are mutually nearest (prediction nearest to the
//! truth among all predictions and vice versa; exact ties count as nearest),
//! and they lie within 20 mm. Localization error is averaged over identified
//! vertebrae only. Standard deviations are population (divide by n).

use crate::heatmap::VertebraAnnotation;
use crate::labels::{self, Region};
use crate::volume::Vec3;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

/// Maximum distance for a match, mm.
pub const MATCH_RADIUS_MM: f64 = 20.0;
const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertebraPrediction {
    pub label: usize,
    pub center: Vec3,
    pub activation: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("duplicate label {label} in {which}")]
    DuplicateLabel { label: usize, which: &'static str },
}

/// Result for one ground-truth vertebra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub label: usize,
    pub identified: bool,
    /// Distance to the same-label prediction, when one exists.
    pub distance_mm: Option<f64>,
}

fn check_unique(labels: impl Iterator<Item = usize>, which: &'static str) -> Result<(), MetricsError> {
    let mut seen = HashSet::new();
    for label in labels {
        if !seen.insert(label) {
            return Err(MetricsError::DuplicateLabel { label, which });
        }
    }
    Ok(())
}

pub fn identify_matches(pred: &[VertebraPrediction], truth: &[VertebraAnnotation]) -> Result<Vec<Outcome>, MetricsError> {
    check_unique(pred.iter().map(|p| p.label), "predictions")?;
    check_unique(truth.iter().map(|t| t.label), "ground truth")?;
    let outcomes = truth
        .iter()
        .map(|t| {
            let Some(p) = pred.iter().find(|p| p.label == t.label) else {
                return Outcome {
                    label: t.label,
                    identified: false,
                    distance_mm: None,
                };
            };
            let d = (p.center - t.center).norm();
            let nearest_pred = pred.iter().map(|q| (q.center - t.center).norm()).fold(f64::INFINITY, f64::min);
            let nearest_truth = truth.iter().map(|u| (u.center - p.center).norm()).fold(f64::INFINITY, f64::min);
            let identified = d <= MATCH_RADIUS_MM && d <= nearest_pred + TIE_EPS && d <= nearest_truth + TIE_EPS;
            Outcome {
                label: t.label,
                identified,
                distance_mm: Some(d),
            }
        })
        .collect();
    Ok(outcomes)
}

/// Aggregate statistics over a set of vertebrae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionStats {
    pub region: String,
    pub identified: usize,
    pub total: usize,
    /// `None` when the region has no ground-truth vertebrae.
    pub id_rate: Option<f64>,
    pub mean_error_mm: Option<f64>,
    pub std_error_mm: Option<f64>,
}

impl RegionStats {
    fn from_outcomes<'a>(region: &str, outcomes: impl Iterator<Item = &'a Outcome>) -> Self {
        let mut total = 0;
        let mut errors = Vec::new();
        for o in outcomes {
            total += 1;
            if o.identified {
                errors.push(o.distance_mm.expect("identified vertebra has a distance"));
            }
        }
        let (mean, std) = mean_std(&errors);
        RegionStats {
            region: region.to_string(),
            identified: errors.len(),
            total,
            id_rate: (total > 0).then(|| errors.len() as f64 / total as f64),
            mean_error_mm: mean,
            std_error_mm: std,
        }
    }
}

/// Mean and population standard deviation; `None` for an empty slice.
pub fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (Some(mean), Some(var.sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub label: usize,
    pub name: String,
    pub identified: usize,
    pub total: usize,
    pub id_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub std_convention: String,
    /// Cervical, thoracic, lumbar, sacrum, in that order.
    pub regions: Vec<RegionStats>,
    pub overall: RegionStats,
    pub per_vertebra: Vec<LabelStats>,
}

impl EvalReport {
    pub fn region(&self, r: Region) -> &RegionStats {
        self.regions.iter().find(|s| s.region == r.name()).expect("every region is reported")
    }

    /// Aligned text table: one row per region plus "All".
    pub fn to_table(&self, title: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{title}");
        let _ = writeln!(out, "(std of error: {} standard deviation)", self.std_convention);
        let _ = writeln!(
            out,
            "{:<10} {:>10} {:>10} {:>9} {:>11}",
            "Region", "Mean Err", "Std Err", "Id Rate", "Identified"
        );
        let fmt = |v: Option<f64>, scale: f64| v.map_or_else(|| "n/a".to_string(), |x| format!("{:.2}", x * scale));
        for s in self.regions.iter().chain(std::iter::once(&self.overall)) {
            let _ = writeln!(
                out,
                "{:<10} {:>10} {:>10} {:>9} {:>11}",
                s.region,
                fmt(s.mean_error_mm, 1.0),
                fmt(s.std_error_mm, 1.0),
                fmt(s.id_rate, 100.0),
                format!("{}/{}", s.identified, s.total)
            );
        }
        out
    }
}

/// Aggregates outcomes (possibly pooled from many cases) per region and overall.
pub fn report(outcomes: &[Outcome]) -> EvalReport {
    let regions = Region::ALL
        .iter()
        .map(|&r| RegionStats::from_outcomes(r.name(), outcomes.iter().filter(|o| Region::of(o.label) == Some(r))))
        .collect();
    let overall = RegionStats::from_outcomes("All", outcomes.iter());
    let mut per: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for o in outcomes {
        let e = per.entry(o.label).or_default();
        e.1 += 1;
        if o.identified {
            e.0 += 1;
        }
    }
    let per_vertebra = per
        .into_iter()
        .map(|(label, (identified, total))| LabelStats {
            label,
            name: labels::label_name(label).map_or_else(|| format!("V{label}"), str::to_string),
            identified,
            total,
            id_rate: Some(identified as f64 / total as f64),
        })
        .collect();
    EvalReport {
        std_convention: "population".into(),
        regions,
        overall,
        per_vertebra,
    }
}
