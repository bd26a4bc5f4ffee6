//! Anatomical vertebra labels.
//!
//! Labels are 1-based and run cranial to caudal: `1..=7` cervical,
//! `8..=19` thoracic, `20..=24` lumbar, `25..=26` sacral.

/// Number of vertebra labels in the full spine.
pub const V_MAX: usize = 26;

const NAMES: [&str; V_MAX] = [
    "C1", "C2", "C3", "C4", "C5", "C6", "C7", "T1", "T2", "T3", "T4", "T5", "T6", "T7", "T8", "T9",
    "T10", "T11", "T12", "L1", "L2", "L3", "L4", "L5", "S1", "S2",
];

/// Spine region used to group evaluation results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Cervical,
    Thoracic,
    Lumbar,
    Sacral,
}

impl Region {
    pub const ALL: [Region; 4] = [
        Region::Cervical,
        Region::Thoracic,
        Region::Lumbar,
        Region::Sacral,
    ];

    pub fn of(label: usize) -> Option<Region> {
        match label {
            1..=7 => Some(Region::Cervical),
            8..=19 => Some(Region::Thoracic),
            20..=24 => Some(Region::Lumbar),
            25..=26 => Some(Region::Sacral),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::Cervical => "Cervical",
            Region::Thoracic => "Thoracic",
            Region::Lumbar => "Lumbar",
            Region::Sacral => "Sacrum",
        }
    }
}

/// Name of a 1-based label ("C1" .. "S2"), or `None` when out of range.
pub fn label_name(label: usize) -> Option<&'static str> {
    label.checked_sub(1).and_then(|i| NAMES.get(i)).copied()
}

/// Inverse of [`label_name`]. Case-insensitive; plain integers are accepted too.
pub fn parse_label(name: &str) -> Option<usize> {
    let trimmed = name.trim();
    if let Ok(n) = trimmed.parse::<usize>() {
        return (1..=V_MAX).contains(&n).then_some(n);
    }
    NAMES
        .iter()
        .position(|n| n.eq_ignore_ascii_case(trimmed))
        .map(|i| i + 1)
}

/// Label names for `1..=v_max`. Labels past the anatomical 26 get a numeric name.
pub fn label_names(v_max: usize) -> Vec<String> {
    (1..=v_max)
        .map(|v| label_name(v).map_or_else(|| format!("V{v}"), str::to_string))
        .collect()
}

/// Default anchor vertebrae: the two labels at each end of the spine.
pub fn default_anchors() -> Vec<usize> {
    vec![1, 2, 25, 26]
}
