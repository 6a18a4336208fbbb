use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{dilate, gaussian_blur, IntensityKind, LabelMask, Volume};

pub const MASK_DILATION: usize = 5;
pub const MASK_BLUR_FACTOR: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskMode {
    /// Original label voxels are forced to 1 after blurring.
    Edge,
    /// Blurred values are used as they are.
    Full,
}

/// Per-voxel replacement weight in `[0, 1]`; 1 means fully generated.
#[derive(Debug, Clone, PartialEq)]
pub struct BlurMask {
    pub values: Volume,
    pub mode: MaskMode,
}

pub fn build_blur_mask(label: &LabelMask, mode: MaskMode) -> Result<BlurMask> {
    build_blur_mask_with(label, mode, MASK_DILATION, MASK_BLUR_FACTOR)
}

/// Dilates the binary label, blurs it and clamps to `[0, 1]`.
pub fn build_blur_mask_with(
    label: &LabelMask,
    mode: MaskMode,
    iterations: usize,
    blur_factor: f64,
) -> Result<BlurMask> {
    if !label.is_binary() {
        return Err(Error::InvalidArgument("blur mask needs a binary label".into()));
    }
    if label.count(1) == 0 {
        return Err(Error::EmptyLabel);
    }
    let dilated = dilate(label, iterations)?;
    let blurred = gaussian_blur(&dilated.to_volume(), blur_factor)?;
    let mut data: Vec<f64> = blurred.into_values().into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
    if mode == MaskMode::Edge {
        for (d, &l) in data.iter_mut().zip(label.labels()) {
            if l == 1 {
                *d = 1.0;
            }
        }
    }
    Ok(BlurMask {
        values: Volume::new(label.geometry(), data, IntensityKind::Arbitrary)?,
        mode,
    })
}
