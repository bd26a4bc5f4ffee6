use super::{Geometry, VolumeError, VolumeGrid};
use crate::labels;

/// One activation volume per vertebra label, all on the same lattice.
///
/// Channel `v` (1-based) holds the activation map of label `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationStack {
    channels: Vec<VolumeGrid>,
    labels: Vec<String>,
}

impl ActivationStack {
    pub fn new(channels: Vec<VolumeGrid>) -> Result<Self, VolumeError> {
        let labels = labels::label_names(channels.len());
        Self::with_labels(channels, labels)
    }

    pub fn with_labels(channels: Vec<VolumeGrid>, labels: Vec<String>) -> Result<Self, VolumeError> {
        let first = channels.first().ok_or(VolumeError::EmptyStack)?;
        let geometry = *first.geometry();
        if let Some(pos) = channels.iter().position(|c| *c.geometry() != geometry) {
            return Err(VolumeError::ChannelGeometry { index: pos + 1 });
        }
        if labels.len() != channels.len() {
            return Err(VolumeError::StackMetadata(format!(
                "{} labels for {} channels",
                labels.len(),
                channels.len()
            )));
        }
        Ok(ActivationStack { channels, labels })
    }

    pub fn zeros(geometry: Geometry, v_max: usize) -> Result<Self, VolumeError> {
        geometry.validate()?;
        Self::new(vec![VolumeGrid::zeros(geometry); v_max])
    }

    pub fn v_max(&self) -> usize {
        self.channels.len()
    }

    pub fn geometry(&self) -> &Geometry {
        self.channels[0].geometry()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Channel for 1-based label `v`.
    pub fn channel(&self, v: usize) -> &VolumeGrid {
        &self.channels[v - 1]
    }

    pub fn channels(&self) -> &[VolumeGrid] {
        &self.channels
    }

    pub(crate) fn channels_mut(&mut self) -> &mut [VolumeGrid] {
        &mut self.channels
    }

    pub fn into_channels(self) -> Vec<VolumeGrid> {
        self.channels
    }

    /// Sum of all channels: activates at every vertebra center regardless of label.
    pub fn combine(&self) -> VolumeGrid {
        let mut acc = VolumeGrid::zeros(*self.geometry());
        for c in &self.channels {
            acc.add_assign(c);
        }
        acc
    }
}
