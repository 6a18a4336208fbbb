use crate::error::Result;
use crate::volume::{LabelMask, Volume};

use super::discretize::{discretize_indices, roi_indices};
use super::{entropy, label_values, ExtractionConfig, Named};

pub const FIRST_ORDER_FEATURES: [&str; 18] = [
    "Energy",
    "TotalEnergy",
    "Entropy",
    "Minimum",
    "10Percentile",
    "90Percentile",
    "Maximum",
    "Mean",
    "Median",
    "InterquartileRange",
    "Range",
    "MeanAbsoluteDeviation",
    "RobustMeanAbsoluteDeviation",
    "RootMeanSquared",
    "Skewness",
    "Kurtosis",
    "Variance",
    "Uniformity",
];

/// Percentile with linear interpolation between closest ranks on sorted data.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// First-order statistics of the ROI intensities. Entropy and uniformity use
/// the fixed-bin-width histogram; moments are population moments; kurtosis is
/// not excess-corrected. Skewness and kurtosis are 0 for a constant ROI.
pub fn first_order(v: &Volume, m: &LabelMask, cfg: &ExtractionConfig) -> Result<Named> {
    cfg.validate()?;
    let roi = roi_indices(v, m, cfg)?;
    let disc = discretize_indices(v, &roi, cfg.bin_width);
    let values: Vec<f64> = roi.iter().map(|&i| v.values()[i]).collect();
    let levels: Vec<u32> = roi.iter().map(|&i| disc.levels()[i]).collect();
    Ok(first_order_values(&values, &levels, v.geometry().voxel_volume()))
}

/// Core of [`first_order`] on pre-gathered ROI values and their gray levels.
pub fn first_order_values(values: &[f64], levels: &[u32], voxel_volume: f64) -> Named {
    assert!(!values.is_empty());
    let n = values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);

    let energy: f64 = values.iter().map(|x| x * x).sum();
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = values.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    let m4 = values.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2))
    } else {
        (0.0, 0.0)
    };

    let p10 = percentile(&sorted, 10.0);
    let p90 = percentile(&sorted, 90.0);
    let robust: Vec<f64> = values.iter().copied().filter(|x| (p10..=p90).contains(x)).collect();
    let robust_mean = robust.iter().sum::<f64>() / robust.len() as f64;
    let rmad = robust.iter().map(|x| (x - robust_mean).abs()).sum::<f64>() / robust.len() as f64;

    let n_levels = levels.iter().copied().max().unwrap_or(0) as usize;
    let mut hist = vec![0.0; n_levels + 1];
    for &l in levels {
        hist[l as usize] += 1.0;
    }
    let probs: Vec<f64> = hist.iter().map(|c| c / n).collect();

    let out = vec![
        energy,
        energy * voxel_volume,
        entropy(probs.iter().copied()),
        sorted[0],
        p10,
        p90,
        sorted[sorted.len() - 1],
        mean,
        percentile(&sorted, 50.0),
        percentile(&sorted, 75.0) - percentile(&sorted, 25.0),
        sorted[sorted.len() - 1] - sorted[0],
        values.iter().map(|x| (x - mean).abs()).sum::<f64>() / n,
        rmad,
        (energy / n).sqrt(),
        skewness,
        kurtosis,
        m2,
        probs.iter().map(|p| p * p).sum(),
    ];
    label_values(&FIRST_ORDER_FEATURES, out)
}
