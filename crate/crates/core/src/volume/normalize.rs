//! Intensity normalization recipes and zero padding.

use serde::{Deserialize, Serialize};

use super::{Dims, Geometry, IntensityKind, Volume};
use crate::error::{Error, Result};

/// Closed intensity window `[lo, hi]`, with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityRange {
    lo: f64,
    hi: f64,
}

impl IntensityRange {
    /// Soft-tissue window used for tumor work.
    pub const CT_TUMOR: IntensityRange = IntensityRange { lo: -200.0, hi: 200.0 };
    /// Wide window used for bone work.
    pub const CT_BONE: IntensityRange = IntensityRange {
        lo: -1000.0,
        hi: 1000.0,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite range [{lo}, {hi}]")));
        }
        if lo >= hi {
            return Err(Error::InvalidArgument(format!(
                "intensity range requires lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn to_unit(&self, v: f64) -> f64 {
        2.0 * (v.clamp(self.lo, self.hi) - self.lo) / (self.hi - self.lo) - 1.0
    }

    #[inline]
    pub fn from_unit(&self, u: f64) -> f64 {
        (u + 1.0) * 0.5 * (self.hi - self.lo) + self.lo
    }
}

/// Clamps HU values to `range` and maps them linearly onto `[-1, 1]`.
pub fn clip_and_scale(v: &Volume, range: IntensityRange) -> Result<Volume> {
    if v.kind() != IntensityKind::Hu {
        return Err(Error::InvalidArgument(format!(
            "clip_and_scale expects HU input, got {}",
            v.kind().as_str()
        )));
    }
    Ok(map_to_unit(v, range))
}

fn map_to_unit(v: &Volume, range: IntensityRange) -> Volume {
    let data = v.values().iter().map(|&x| range.to_unit(x)).collect();
    Volume::from_parts_unchecked(*v.geometry(), data, IntensityKind::Normalized)
}

/// Maps normalized values back to HU. Voxels that were clipped come back at
/// the window bounds.
pub fn inverse_clip_and_scale(v: &Volume, range: IntensityRange) -> Result<Volume> {
    if v.kind() != IntensityKind::Normalized {
        return Err(Error::InvalidArgument(format!(
            "inverse mapping expects normalized input, got {}",
            v.kind().as_str()
        )));
    }
    let data = v.values().iter().map(|&u| range.from_unit(u)).collect();
    Ok(Volume::from_parts_unchecked(*v.geometry(), data, IntensityKind::Hu))
}

/// Nearest-rank quantile of an ascending-sorted slice: the element at rank
/// `ceil(q * n)` (1-based), with `q = 0` giving the minimum.
pub fn nearest_rank_quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let n = sorted.len();
    let rank = (q * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Clips at the empirical `q_lo` / `q_hi` quantiles, then maps linearly to `[-1, 1]`.
pub fn quantile_normalize(v: &Volume, q_lo: f64, q_hi: f64) -> Result<Volume> {
    if !(0.0..=1.0).contains(&q_lo) || !(0.0..=1.0).contains(&q_hi) || q_lo >= q_hi {
        return Err(Error::InvalidArgument(format!(
            "quantiles must satisfy 0 <= q_lo < q_hi <= 1, got ({q_lo}, {q_hi})"
        )));
    }
    let mut sorted = v.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = nearest_rank_quantile(&sorted, q_lo);
    let hi = nearest_rank_quantile(&sorted, q_hi);
    if lo == hi {
        return Err(Error::DegenerateRange(lo));
    }
    Ok(map_to_unit(v, IntensityRange { lo, hi }))
}

/// Centers `v` inside a grid of shape `target`, filling new voxels with `fill`.
/// Odd size differences put the extra voxel after the source.
pub fn pad_to_shape(v: &Volume, target: Dims, fill: f64) -> Result<Volume> {
    let src = v.dims();
    if src.iter().zip(target.iter()).any(|(s, t)| t < s) {
        return Err(Error::TargetTooSmall {
            source_dims: src,
            target,
        });
    }
    let offset = [0, 1, 2].map(|a| (target[a] - src[a]) / 2);
    let geometry = Geometry::new(target, v.spacing())?;
    let mut data = vec![fill; geometry.len()];
    for z in 0..src[2] {
        for y in 0..src[1] {
            let s = v.geometry().index(0, y, z);
            let d = geometry.index(offset[0], y + offset[1], z + offset[2]);
            data[d..d + src[0]].copy_from_slice(&v.values()[s..s + src[0]]);
        }
    }
    Volume::new(geometry, data, v.kind())
}

/// Inverse of [`pad_to_shape`]: extracts the centered block of shape `target`.
pub fn center_crop(v: &Volume, target: Dims) -> Result<Volume> {
    let src = v.dims();
    if src.iter().zip(target.iter()).any(|(s, t)| t > s) || target.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "cannot crop {src:?} to {target:?}"
        )));
    }
    let offset = [0, 1, 2].map(|a| (src[a] - target[a]) / 2);
    let geometry = Geometry::new(target, v.spacing())?;
    let mut data = Vec::with_capacity(geometry.len());
    for z in 0..target[2] {
        for y in 0..target[1] {
            let s = v.geometry().index(offset[0], y + offset[1], z + offset[2]);
            data.extend_from_slice(&v.values()[s..s + target[0]]);
        }
    }
    Ok(Volume::from_parts_unchecked(geometry, data, v.kind()))
}
