use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{wavelet3d, Geometry, IntensityKind, LabelMask, Volume};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionMode {
    /// Eight Haar bands per input channel.
    Wavelet,
    /// Nearest-neighbour downsampling by 2 per axis.
    Downsample,
}

/// Conditioning channels at half the input resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub mode: ConditionMode,
    pub channels: Vec<Volume>,
}

impl Condition {
    /// `[channels, nx, ny, nz]`.
    pub fn shape(&self) -> [usize; 4] {
        let [x, y, z] = self.channels[0].dims();
        [self.channels.len(), x, y, z]
    }
}

/// Target voxel `i` reads source voxel `floor(i · src/dst)` on each axis.
pub fn nearest_downsample(v: &Volume, target: [usize; 3]) -> Result<Volume> {
    let src = v.dims();
    if target.iter().zip(&src).any(|(t, s)| *t == 0 || t > s) {
        return Err(Error::InvalidArgument(format!(
            "cannot downsample {src:?} to {target:?}"
        )));
    }
    let map = |axis: usize, i: usize| i * src[axis] / target[axis];
    let sp = v.spacing();
    let geometry = Geometry::new(
        target,
        [0, 1, 2].map(|a| sp[a] * src[a] as f64 / target[a] as f64),
    )?;
    Volume::from_fn(geometry, v.kind(), |x, y, z| v.get(map(0, x), map(1, y), map(2, z)))
}

/// Stacks the ROI-size map, the contrast flag map and the segmentation in
/// that order. Wavelet mode gives 3 × 8 band channels ordered channel-major;
/// downsample mode gives 3 channels. All inputs share one geometry with even
/// dimensions.
pub fn assemble_condition(
    roi_map: &Volume,
    contrast_map: &Volume,
    seg: &LabelMask,
    mode: ConditionMode,
) -> Result<Condition> {
    let g = roi_map.geometry();
    g.ensure_matches(contrast_map.geometry())?;
    g.ensure_matches(&seg.geometry())?;
    let seg = seg.to_volume();
    let inputs = [roi_map, contrast_map, &seg];
    let mut channels = Vec::new();
    match mode {
        ConditionMode::Wavelet => {
            for v in inputs {
                channels.extend(wavelet3d(v)?.into_vec());
            }
        }
        ConditionMode::Downsample => {
            for (axis, &n) in g.dims.iter().enumerate() {
                if n % 2 == 1 {
                    return Err(Error::OddDimension { axis, len: n });
                }
            }
            let target = g.dims.map(|d| d / 2);
            for v in inputs {
                channels.push(nearest_downsample(v, target)?.with_kind(IntensityKind::Arbitrary)?);
            }
        }
    }
    Ok(Condition { mode, channels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_picks_even_voxels() {
        let g = Geometry::isotropic([4, 4, 4]);
        let v = Volume::from_fn(g, IntensityKind::Arbitrary, |x, y, z| (x + 4 * y + 16 * z) as f64).unwrap();
        let d = nearest_downsample(&v, [2, 2, 2]).unwrap();
        for z in 0..2 {
            for y in 0..2 {
                for x in 0..2 {
                    assert_eq!(d.get(x, y, z), v.get(2 * x, 2 * y, 2 * z));
                }
            }
        }
        assert_eq!(d.spacing(), [2.0; 3]);
    }

    #[test]
    fn shapes() {
        let g = Geometry::isotropic([8, 8, 8]);
        let a = Volume::filled(g, 1.0, IntensityKind::Arbitrary).unwrap();
        let m = LabelMask::empty(g);
        let w = assemble_condition(&a, &a, &m, ConditionMode::Wavelet).unwrap();
        assert_eq!(w.shape(), [24, 4, 4, 4]);
        let d = assemble_condition(&a, &a, &m, ConditionMode::Downsample).unwrap();
        assert_eq!(d.shape(), [3, 4, 4, 4]);
        assert!(d.channels[0].values().iter().all(|&x| x == 1.0));
    }
}
