//! Axis-aligned scalar volumes in physical (mm) coordinates.
//!
//! A [`VolumeGrid`] maps voxel `(i, j, k)` to `origin + (i, j, k) * spacing`.
//! Data is stored x-fastest. Sampling outside the hull of voxel centers
//! yields `0.0`, which is the natural extension for activation maps.

mod grid;
mod io;
mod stack;

pub use grid::{Geometry, Stencil, VolumeGrid};
pub use io::{decode_volume, encode_volume, read_stack, read_volume, write_stack, write_volume};
pub use stack::ActivationStack;

use std::path::PathBuf;

/// 3-D vector in world millimetres.
pub type Vec3 = nalgebra::Vector3<f64>;

#[derive(Debug, thiserror::Error)]
pub enum VolumeError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("data length {actual} does not match dims product {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("non-finite value at linear index {index}")]
    NonFinite { index: usize },
    #[error("not a VGF1 file (magic bytes {found:?})")]
    BadMagic { found: Vec<u8> },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("payload holds {actual} values but header declares {expected}")]
    PayloadMismatch { expected: usize, actual: usize },
    #[error("channel {index} geometry differs from channel 1")]
    ChannelGeometry { index: usize },
    #[error("stack must hold at least one channel")]
    EmptyStack,
    #[error("stack metadata: {0}")]
    StackMetadata(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
