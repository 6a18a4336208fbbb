//! Similarity and utility statistics between real and synthetic data.

mod ccc;
mod dsc;
mod ms_ssim;
mod pca;

pub use ccc::{ccc, ccc_report, CccCategory, CccReport, CategoryCounts};
pub use dsc::{dsc, dsc_mean, DscMode, DscReport, GroupMap};
pub use ms_ssim::{ms_ssim, ms_ssim_with, MsSsimConfig};
pub use pca::{pca_distance, PcaReport};

use crate::error::Result;
use crate::volume::Volume;

/// Mean absolute voxel difference.
pub fn mae(a: &Volume, b: &Volume) -> Result<f64> {
    a.geometry().ensure_matches(b.geometry())?;
    let sum: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).sum();
    Ok(sum / a.len() as f64)
}
