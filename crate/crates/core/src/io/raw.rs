//! Raw little-endian float32 payload with a JSON sidecar describing geometry.
//!
//! `case.raw` is paired with `case.json`:
//! `{"dims": [nx, ny, nz], "spacing": [sx, sy, sz], "intensity_kind": "hu"}`.

use std::fs;
use std::path::{Path, PathBuf};

use byteorder::{ByteOrder, LittleEndian};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{Dims, Geometry, IntensityKind, Spacing, Volume};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSidecar {
    pub dims: Dims,
    pub spacing: Spacing,
    pub intensity_kind: IntensityKind,
}

pub fn sidecar_path(payload: &Path) -> PathBuf {
    payload.with_extension("json")
}

pub fn write_raw(path: impl AsRef<Path>, v: &Volume) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = vec![0u8; 4 * v.len()];
    for (chunk, &x) in bytes.chunks_exact_mut(4).zip(v.values()) {
        LittleEndian::write_f32(chunk, x as f32);
    }
    fs::write(path, bytes)?;
    let sidecar = RawSidecar {
        dims: v.dims(),
        spacing: v.spacing(),
        intensity_kind: v.kind(),
    };
    fs::write(sidecar_path(path), serde_json::to_vec_pretty(&sidecar)?)?;
    Ok(())
}

pub fn read_raw(path: impl AsRef<Path>) -> Result<Volume> {
    let path = path.as_ref();
    let sidecar: RawSidecar = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
    let bytes = fs::read(path)?;
    let geometry = Geometry::new(sidecar.dims, sidecar.spacing)?;
    if bytes.len() != 4 * geometry.len() {
        return Err(Error::Format(format!(
            "{} holds {} bytes, sidecar dims {:?} need {}",
            path.display(),
            bytes.len(),
            sidecar.dims,
            4 * geometry.len()
        )));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| f64::from(LittleEndian::read_f32(c)))
        .collect();
    Volume::new(geometry, data, sidecar.intensity_kind)
}
