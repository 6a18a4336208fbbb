use crate::error::{Error, Result};
use crate::volume::{Dims, LabelMask, Volume};

use super::ExtractionConfig;

/// Gray levels of the ROI voxels on the image grid; voxels outside the ROI
/// hold level 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscretizedRoi {
    dims: Dims,
    levels: Vec<u32>,
    n_levels: u32,
    roi: Vec<usize>,
}

impl DiscretizedRoi {
    /// Builds from explicit levels (0 = outside). Fails on an empty ROI.
    pub fn from_levels(dims: Dims, levels: Vec<u32>) -> Result<Self> {
        assert_eq!(levels.len(), dims.iter().product::<usize>());
        let roi: Vec<usize> = (0..levels.len()).filter(|&i| levels[i] > 0).collect();
        if roi.is_empty() {
            return Err(Error::EmptyRoi(1));
        }
        let n_levels = roi.iter().map(|&i| levels[i]).max().unwrap_or(0);
        Ok(Self {
            dims,
            levels,
            n_levels,
            roi,
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Highest level present; levels run over `1..=n_levels`.
    pub fn n_levels(&self) -> u32 {
        self.n_levels
    }

    pub fn roi_voxel_count(&self) -> usize {
        self.roi.len()
    }

    /// Linear indices of ROI voxels in ascending order.
    pub fn roi_indices(&self) -> &[usize] {
        &self.roi
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    #[inline]
    pub fn level_at(&self, x: isize, y: isize, z: isize) -> u32 {
        let [nx, ny, nz] = self.dims;
        if x < 0 || y < 0 || z < 0 || x as usize >= nx || y as usize >= ny || z as usize >= nz {
            return 0;
        }
        self.levels[x as usize + nx * (y as usize + ny * z as usize)]
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [isize; 3] {
        let [nx, ny, _] = self.dims;
        [(idx % nx) as isize, ((idx / nx) % ny) as isize, (idx / (nx * ny)) as isize]
    }
}

/// Voxels of `m` carrying `cfg.label`, checked against the image geometry.
pub(crate) fn roi_indices(v: &Volume, m: &LabelMask, cfg: &ExtractionConfig) -> Result<Vec<usize>> {
    let mg = m.geometry();
    let vg = v.geometry();
    if vg.dims != mg.dims {
        return Err(Error::GeometryMismatch(format!(
            "image {:?} vs mask {:?}",
            vg.dims, mg.dims
        )));
    }
    // With mask correction, spacing that only differs by header rounding is accepted.
    let tol = if cfg.correct_mask { 1e-3 } else { 1e-6 };
    let spacing_ok = vg
        .spacing
        .iter()
        .zip(mg.spacing.iter())
        .all(|(a, b)| (a - b).abs() <= tol * a.abs().max(b.abs()));
    if !spacing_ok {
        return Err(Error::GeometryMismatch(format!(
            "image spacing {:?} vs mask spacing {:?}",
            vg.spacing, mg.spacing
        )));
    }
    let roi: Vec<usize> = m
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == cfg.label)
        .map(|(i, _)| i)
        .collect();
    if roi.is_empty() {
        return Err(Error::EmptyRoi(cfg.label));
    }
    Ok(roi)
}

/// Fixed-bin-width discretization: `level = floor((x - min_roi) / bin_width) + 1`.
pub fn discretize(v: &Volume, m: &LabelMask, cfg: &ExtractionConfig) -> Result<DiscretizedRoi> {
    cfg.validate()?;
    let roi = roi_indices(v, m, cfg)?;
    Ok(discretize_indices(v, &roi, cfg.bin_width))
}

pub(crate) fn discretize_indices(v: &Volume, roi: &[usize], bin_width: f64) -> DiscretizedRoi {
    let values = v.values();
    let min = roi.iter().map(|&i| values[i]).fold(f64::INFINITY, f64::min);
    let mut levels = vec![0u32; values.len()];
    let mut n_levels = 0;
    for &i in roi {
        let level = ((values[i] - min) / bin_width).floor() as u32 + 1;
        levels[i] = level;
        n_levels = n_levels.max(level);
    }
    DiscretizedRoi {
        dims: v.dims(),
        levels,
        n_levels,
        roi: roi.to_vec(),
    }
}
