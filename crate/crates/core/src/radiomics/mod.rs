//! Radiomic feature extraction.
//!
//! Intensities inside one labelled ROI are binned with a fixed bin width and
//! summarised by six families: 3D shape (computed once from the mask),
//! first-order statistics and four texture matrices (GLCM, GLRLM, GLDM,
//! NGTDM). The intensity families are evaluated on the original image, on
//! Laplacian-of-Gaussian responses and on the eight undecimated Haar bands.
//!
//! Texture conventions: co-occurrence and run matrices use the 13 unique 3D
//! directions at distance 1 and average the per-direction features;
//! dependence and tone-difference matrices use the 26-neighbourhood.
//! Logarithms are base 2 with `0 · log 0 = 0`.

mod discretize;
mod extract;
mod first_order;
mod glcm;
mod gldm;
mod glrlm;
mod log_filter;
mod manifest;
mod ngtdm;
mod shape;
mod table;

pub use discretize::{discretize, DiscretizedRoi};
pub use extract::{extract_all, extract_batch, filtered_images, FeatureVector};
pub use first_order::{first_order, first_order_values, FIRST_ORDER_FEATURES};
pub use glcm::{glcm_features, glcm_matrices, GLCM_FEATURES};
pub use gldm::{gldm_features, gldm_matrix, GLDM_FEATURES};
pub use glrlm::{glrlm_direction_features, glrlm_features, glrlm_matrices, GLRLM_FEATURES};
pub use log_filter::{log_filter, log_kernels};
pub use manifest::{Family, ImageType, Manifest, ManifestEntry};
pub use ngtdm::{ngtdm_features, ngtdm_stats, NgtdmStats, NGTDM_FEATURES};
pub use shape::{shape_features, SHAPE_FEATURES};
pub use table::FeatureTable;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feature values in the fixed order of a family's name list.
pub type Named = Vec<(&'static str, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionConfig {
    pub bin_width: f64,
    pub label: u32,
    pub correct_mask: bool,
    pub log_sigmas_mm: Vec<f64>,
    pub enable_wavelet: bool,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            bin_width: 25.0,
            label: 1,
            correct_mask: true,
            log_sigmas_mm: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            enable_wavelet: true,
        }
    }
}

impl ExtractionConfig {
    /// Shape plus intensity families on the original image only.
    pub fn original_only() -> Self {
        Self {
            log_sigmas_mm: Vec::new(),
            enable_wavelet: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bin width must be positive, got {}",
                self.bin_width
            )));
        }
        if let Some(s) = self.log_sigmas_mm.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidArgument(format!("LoG sigma must be positive, got {s}")));
        }
        Ok(())
    }
}

/// The 13 unique neighbour offsets of the 26-neighbourhood (one of each ± pair).
pub const DIRECTIONS_13: [[isize; 3]; 13] = [
    [1, 0, 0],
    [-1, 1, 0],
    [0, 1, 0],
    [1, 1, 0],
    [-1, -1, 1],
    [0, -1, 1],
    [1, -1, 1],
    [-1, 0, 1],
    [0, 0, 1],
    [1, 0, 1],
    [-1, 1, 1],
    [0, 1, 1],
    [1, 1, 1],
];

/// All 26 offsets of the 3×3×3 neighbourhood, centre excluded.
pub(crate) fn neighbours_26() -> impl Iterator<Item = [isize; 3]> {
    (-1..=1).flat_map(|dz| {
        (-1..=1).flat_map(move |dy| {
            (-1..=1)
                .map(move |dx| [dx, dy, dz])
                .filter(|d| *d != [0, 0, 0])
        })
    })
}

/// `-Σ p log2 p` over positive entries.
pub(crate) fn entropy(p: impl IntoIterator<Item = f64>) -> f64 {
    -p.into_iter()
        .filter(|&x| x > 0.0)
        .map(|x| x * x.log2())
        .sum::<f64>()
}

fn mean_of(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len() as f64;
    let mut out = vec![0.0; rows[0].len()];
    for r in rows {
        for (o, v) in out.iter_mut().zip(r) {
            *o += v;
        }
    }
    out.iter_mut().for_each(|o| *o /= n);
    out
}

pub(crate) fn label_values(names: &[&'static str], values: Vec<f64>) -> Named {
    debug_assert_eq!(names.len(), values.len());
    names.iter().copied().zip(values).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirteen_directions_cover_half_the_neighbourhood() {
        let mut all: Vec<[isize; 3]> = DIRECTIONS_13.to_vec();
        all.extend(DIRECTIONS_13.iter().map(|d| d.map(|c| -c)));
        all.sort();
        let mut expect: Vec<[isize; 3]> = neighbours_26().collect();
        expect.sort();
        assert_eq!(all, expect);
    }

    #[test]
    fn config_validation() {
        assert!(ExtractionConfig::default().validate().is_ok());
        let bad = ExtractionConfig {
            bin_width: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ExtractionConfig {
            log_sigmas_mm: vec![1.0, -2.0],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
