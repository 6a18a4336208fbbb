//! Gray Level Run Length Matrix.

use super::{entropy, label_values, mean_of, DiscretizedRoi, Named, DIRECTIONS_13};

pub const GLRLM_FEATURES: [&str; 16] = [
    "ShortRunEmphasis",
    "LongRunEmphasis",
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "RunLengthNonUniformity",
    "RunLengthNonUniformityNormalized",
    "RunPercentage",
    "GrayLevelVariance",
    "RunVariance",
    "RunEntropy",
    "LowGrayLevelRunEmphasis",
    "HighGrayLevelRunEmphasis",
    "ShortRunLowGrayLevelEmphasis",
    "ShortRunHighGrayLevelEmphasis",
    "LongRunLowGrayLevelEmphasis",
    "LongRunHighGrayLevelEmphasis",
];

/// Run counts per direction: `matrix[level - 1][length - 1]`.
pub fn glrlm_matrices(d: &DiscretizedRoi) -> Vec<Vec<Vec<f64>>> {
    let ng = d.n_levels() as usize;
    let max_len = *d.dims().iter().max().unwrap();
    DIRECTIONS_13
        .iter()
        .map(|off| {
            let mut r = vec![vec![0.0; max_len]; ng];
            for &idx in d.roi_indices() {
                let [x, y, z] = d.coords(idx);
                let level = d.levels()[idx];
                // Only run heads start a walk.
                if d.level_at(x - off[0], y - off[1], z - off[2]) == level {
                    continue;
                }
                let mut len = 1;
                while d.level_at(
                    x + off[0] * len as isize,
                    y + off[1] * len as isize,
                    z + off[2] * len as isize,
                ) == level
                {
                    len += 1;
                }
                r[level as usize - 1][len - 1] += 1.0;
            }
            r
        })
        .collect()
}

/// The 16 features of one run-length matrix. `n_voxels` is the ROI size.
pub fn glrlm_direction_features(r: &[Vec<f64>], n_voxels: usize) -> Vec<f64> {
    let nr: f64 = r.iter().flatten().sum();
    let ng = r.len();
    let nl = r.first().map_or(0, Vec::len);
    let gl = |i: usize| (i + 1) as f64;
    let rl = |j: usize| (j + 1) as f64;

    let mut mu_i = 0.0;
    let mut mu_j = 0.0;
    for i in 0..ng {
        for j in 0..nl {
            let p = r[i][j] / nr;
            mu_i += p * gl(i);
            mu_j += p * rl(j);
        }
    }
    let mut out = [0.0; 16];
    for i in 0..ng {
        for j in 0..nl {
            let p = r[i][j] / nr;
            if p == 0.0 {
                continue;
            }
            let (a, b) = (gl(i) * gl(i), rl(j) * rl(j));
            out[0] += p / b;
            out[1] += p * b;
            out[7] += p * (gl(i) - mu_i).powi(2);
            out[8] += p * (rl(j) - mu_j).powi(2);
            out[10] += p / a;
            out[11] += p * a;
            out[12] += p / (a * b);
            out[13] += p * a / b;
            out[14] += p * b / a;
            out[15] += p * a * b;
        }
    }
    let gln: f64 = r.iter().map(|row| row.iter().sum::<f64>().powi(2)).sum();
    let rln: f64 = (0..nl)
        .map(|j| r.iter().map(|row| row[j]).sum::<f64>().powi(2))
        .sum();
    out[2] = gln / nr;
    out[3] = gln / (nr * nr);
    out[4] = rln / nr;
    out[5] = rln / (nr * nr);
    out[6] = nr / n_voxels as f64;
    out[9] = entropy(r.iter().flatten().map(|c| c / nr));
    out.to_vec()
}

/// Features per direction, averaged over the 13 directions. Every ROI voxel
/// lies on a run in every direction, so no direction is empty.
pub fn glrlm_features(d: &DiscretizedRoi) -> Named {
    let per_dir: Vec<Vec<f64>> = glrlm_matrices(d)
        .iter()
        .map(|r| glrlm_direction_features(r, d.roi_voxel_count()))
        .collect();
    label_values(&GLRLM_FEATURES, mean_of(&per_dir))
}
