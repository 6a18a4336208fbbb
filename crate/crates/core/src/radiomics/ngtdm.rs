//! Neighbourhood Gray Tone Difference Matrix over the 26-neighbourhood.

use super::{label_values, neighbours_26, DiscretizedRoi, Named};

pub const NGTDM_FEATURES: [&str; 5] = ["Coarseness", "Contrast", "Busyness", "Complexity", "Strength"];

/// Coarseness reported when the tone differences sum to zero.
pub const COARSENESS_CAP: f64 = 1e6;

/// Per-level voxel counts `n` and absolute tone-difference sums `s`, over ROI
/// voxels that have at least one ROI neighbour.
#[derive(Debug, Clone, PartialEq)]
pub struct NgtdmStats {
    pub n: Vec<f64>,
    pub s: Vec<f64>,
}

pub fn ngtdm_stats(d: &DiscretizedRoi) -> NgtdmStats {
    let ng = d.n_levels() as usize;
    let offsets: Vec<[isize; 3]> = neighbours_26().collect();
    let mut n = vec![0.0; ng];
    let mut s = vec![0.0; ng];
    for &idx in d.roi_indices() {
        let [x, y, z] = d.coords(idx);
        let mut sum = 0.0;
        let mut count = 0usize;
        for o in &offsets {
            let l = d.level_at(x + o[0], y + o[1], z + o[2]);
            if l > 0 {
                sum += f64::from(l);
                count += 1;
            }
        }
        if count == 0 {
            continue;
        }
        let level = d.levels()[idx];
        let k = level as usize - 1;
        n[k] += 1.0;
        s[k] += (f64::from(level) - sum / count as f64).abs();
    }
    NgtdmStats { n, s }
}

/// A ROI in which no voxel has a neighbour yields coarseness at the cap and
/// zeros elsewhere; zero denominators likewise give 0.
pub fn ngtdm_features(d: &DiscretizedRoi) -> Named {
    let NgtdmStats { n, s } = ngtdm_stats(d);
    let nvp: f64 = n.iter().sum();
    if nvp == 0.0 {
        return label_values(&NGTDM_FEATURES, vec![COARSENESS_CAP, 0.0, 0.0, 0.0, 0.0]);
    }
    let p: Vec<f64> = n.iter().map(|c| c / nvp).collect();
    let present: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    let ngp = present.len() as f64;
    let lv = |k: usize| (k + 1) as f64;

    let ps: f64 = present.iter().map(|&i| p[i] * s[i]).sum();
    let s_total: f64 = s.iter().sum();
    let coarseness = if ps > 0.0 { 1.0 / ps } else { COARSENESS_CAP };

    let mut pair_contrast = 0.0;
    let mut busy_den = 0.0;
    let mut complexity = 0.0;
    let mut strength_num = 0.0;
    for &i in &present {
        for &j in &present {
            let diff = lv(i) - lv(j);
            pair_contrast += p[i] * p[j] * diff * diff;
            busy_den += (lv(i) * p[i] - lv(j) * p[j]).abs();
            complexity += diff.abs() * (p[i] * s[i] + p[j] * s[j]) / (p[i] + p[j]);
            strength_num += (p[i] + p[j]) * diff * diff;
        }
    }
    let contrast = if ngp > 1.0 {
        pair_contrast / (ngp * (ngp - 1.0)) * s_total / nvp
    } else {
        0.0
    };
    let busyness = if busy_den > 0.0 { ps / busy_den } else { 0.0 };
    let strength = if s_total > 0.0 { strength_num / s_total } else { 0.0 };
    label_values(
        &NGTDM_FEATURES,
        vec![coarseness, contrast, busyness, complexity / nvp, strength],
    )
}
