//! Gray Level Dependence Matrix with dependence cutoff 0 (exact level match).

use super::{entropy, label_values, neighbours_26, DiscretizedRoi, Named};

pub const GLDM_FEATURES: [&str; 14] = [
    "SmallDependenceEmphasis",
    "LargeDependenceEmphasis",
    "GrayLevelNonUniformity",
    "DependenceNonUniformity",
    "DependenceNonUniformityNormalized",
    "GrayLevelVariance",
    "DependenceVariance",
    "DependenceEntropy",
    "LowGrayLevelEmphasis",
    "HighGrayLevelEmphasis",
    "SmallDependenceLowGrayLevelEmphasis",
    "SmallDependenceHighGrayLevelEmphasis",
    "LargeDependenceLowGrayLevelEmphasis",
    "LargeDependenceHighGrayLevelEmphasis",
];

/// `matrix[level - 1][dependence - 1]` where dependence counts the voxel itself
/// plus its same-level ROI neighbours, so it ranges over 1..=27.
pub fn gldm_matrix(d: &DiscretizedRoi) -> Vec<Vec<f64>> {
    let ng = d.n_levels() as usize;
    let offsets: Vec<[isize; 3]> = neighbours_26().collect();
    let mut m = vec![vec![0.0; 27]; ng];
    for &idx in d.roi_indices() {
        let [x, y, z] = d.coords(idx);
        let level = d.levels()[idx];
        let dep = 1 + offsets
            .iter()
            .filter(|o| d.level_at(x + o[0], y + o[1], z + o[2]) == level)
            .count();
        m[level as usize - 1][dep - 1] += 1.0;
    }
    m
}

pub fn gldm_features(d: &DiscretizedRoi) -> Named {
    let m = gldm_matrix(d);
    let nz: f64 = m.iter().flatten().sum();
    let gl = |i: usize| (i + 1) as f64;
    let dp = |j: usize| (j + 1) as f64;
    let mut mu_i = 0.0;
    let mut mu_j = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            mu_i += c / nz * gl(i);
            mu_j += c / nz * dp(j);
        }
    }
    let mut out = [0.0; 14];
    for (i, row) in m.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let p = c / nz;
            let (a, b) = (gl(i) * gl(i), dp(j) * dp(j));
            out[0] += p / b;
            out[1] += p * b;
            out[5] += p * (gl(i) - mu_i).powi(2);
            out[6] += p * (dp(j) - mu_j).powi(2);
            out[8] += p / a;
            out[9] += p * a;
            out[10] += p / (a * b);
            out[11] += p * a / b;
            out[12] += p * b / a;
            out[13] += p * a * b;
        }
    }
    let gln: f64 = m.iter().map(|r| r.iter().sum::<f64>().powi(2)).sum();
    let dn: f64 = (0..27)
        .map(|j| m.iter().map(|r| r[j]).sum::<f64>().powi(2))
        .sum();
    out[2] = gln / nz;
    out[3] = dn / nz;
    out[4] = dn / (nz * nz);
    out[7] = entropy(m.iter().flatten().map(|c| c / nz));
    label_values(&GLDM_FEATURES, out.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isolated_voxel_depends_on_itself_only() {
        let mut levels = vec![0; 27];
        levels[13] = 1;
        let d = DiscretizedRoi::from_levels([3, 3, 3], levels).unwrap();
        let m = gldm_matrix(&d);
        assert_eq!(m[0][0], 1.0);
        let f = gldm_features(&d);
        assert_eq!(f[0].1, 1.0);
        assert_eq!(f[7].1, 0.0);
    }

    #[test]
    fn full_cube_centre_has_27() {
        let d = DiscretizedRoi::from_levels([3, 3, 3], vec![4; 27]).unwrap();
        let m = gldm_matrix(&d);
        assert_eq!(m[3][26], 1.0);
        // corners see 7 neighbours + self
        assert_eq!(m[3][7], 8.0);
    }
}
