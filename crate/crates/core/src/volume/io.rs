//! VGF1 volume files and on-disk activation stacks.
//!
//! Layout: `b"VGF1"`, u32 W, H, L, f64 spacing x/y/z, f64 origin x/y/z, then
//! W·H·L f32 values x-fastest. Everything little-endian.

use super::{ActivationStack, Geometry, VolumeError, VolumeGrid};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

const MAGIC: &[u8; 4] = b"VGF1";
const HEADER_LEN: usize = 4 + 3 * 4 + 6 * 8;

pub fn encode_volume(grid: &VolumeGrid) -> Vec<u8> {
    let g = grid.geometry();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * grid.data().len());
    out.extend_from_slice(MAGIC);
    for d in g.dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in g.spacing.iter().chain(&g.origin) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &v in grid.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_volume(bytes: &[u8]) -> Result<VolumeGrid, VolumeError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(VolumeError::BadMagic {
            found: bytes.iter().take(4).copied().collect(),
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(VolumeError::MalformedHeader(format!(
            "{} bytes, header needs {HEADER_LEN}",
            bytes.len()
        )));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let dims = [u32_at(4), u32_at(8), u32_at(12)];
    let spacing = [f64_at(16), f64_at(24), f64_at(32)];
    let origin = [f64_at(40), f64_at(48), f64_at(56)];
    let geometry = Geometry::new(dims, spacing, origin)
        .map_err(|e| VolumeError::MalformedHeader(e.to_string()))?;

    let payload = &bytes[HEADER_LEN..];
    if payload.len() % 4 != 0 || payload.len() / 4 != geometry.len() {
        return Err(VolumeError::PayloadMismatch {
            expected: geometry.len(),
            actual: payload.len() / 4,
        });
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    VolumeGrid::new(geometry, data)
}

pub fn write_volume(grid: &VolumeGrid, path: impl AsRef<Path>) -> Result<(), VolumeError> {
    let path = path.as_ref();
    fs::write(path, encode_volume(grid)).map_err(|source| VolumeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_volume(path: impl AsRef<Path>) -> Result<VolumeGrid, VolumeError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| VolumeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_volume(&bytes)
}

#[derive(Debug, Serialize, Deserialize)]
struct StackMeta {
    v_max: usize,
    labels: Vec<String>,
}

fn channel_file(v: usize) -> String {
    format!("channel_{v:02}.vgf")
}

/// Writes `channel_01.vgf` .. `channel_NN.vgf` and `stack.json` into `dir`.
pub fn write_stack(stack: &ActivationStack, dir: impl AsRef<Path>) -> Result<(), VolumeError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| VolumeError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for (i, ch) in stack.channels().iter().enumerate() {
        write_volume(ch, dir.join(channel_file(i + 1)))?;
    }
    let meta = StackMeta {
        v_max: stack.v_max(),
        labels: stack.labels().to_vec(),
    };
    let path = dir.join("stack.json");
    let text = serde_json::to_string_pretty(&meta).expect("stack metadata serializes");
    fs::write(&path, text).map_err(|source| VolumeError::Io { path, source })
}

pub fn read_stack(dir: impl AsRef<Path>) -> Result<ActivationStack, VolumeError> {
    let dir = dir.as_ref();
    let path = dir.join("stack.json");
    let text = fs::read_to_string(&path).map_err(|source| VolumeError::Io { path, source })?;
    let meta: StackMeta =
        serde_json::from_str(&text).map_err(|e| VolumeError::StackMetadata(e.to_string()))?;
    if meta.v_max == 0 || meta.labels.len() != meta.v_max {
        return Err(VolumeError::StackMetadata(format!(
            "v_max {} with {} labels",
            meta.v_max,
            meta.labels.len()
        )));
    }
    let channels = (1..=meta.v_max)
        .map(|v| read_volume(dir.join(channel_file(v))))
        .collect::<Result<Vec<_>, _>>()?;
    ActivationStack::with_labels(channels, meta.labels)
}
