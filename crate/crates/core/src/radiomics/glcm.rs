//! Gray Level Co-occurrence Matrix.

use super::{entropy, label_values, mean_of, DiscretizedRoi, Named, DIRECTIONS_13};

pub const GLCM_FEATURES: [&str; 22] = [
    "Autocorrelation",
    "JointAverage",
    "ClusterProminence",
    "ClusterShade",
    "ClusterTendency",
    "Contrast",
    "Correlation",
    "DifferenceAverage",
    "DifferenceEntropy",
    "DifferenceVariance",
    "JointEnergy",
    "JointEntropy",
    "Imc1",
    "Imc2",
    "Idm",
    "Idmn",
    "Id",
    "Idn",
    "InverseVariance",
    "MaximumProbability",
    "SumEntropy",
    "SumSquares",
];

/// Symmetric co-occurrence counts per direction, `n_levels × n_levels`
/// row-major with row/column `k` holding level `k + 1`.
pub fn glcm_matrices(d: &DiscretizedRoi) -> Vec<Vec<f64>> {
    let ng = d.n_levels() as usize;
    DIRECTIONS_13
        .iter()
        .map(|off| {
            let mut p = vec![0.0; ng * ng];
            for &idx in d.roi_indices() {
                let [x, y, z] = d.coords(idx);
                let a = d.levels()[idx];
                let b = d.level_at(x + off[0], y + off[1], z + off[2]);
                if b > 0 {
                    let (i, j) = (a as usize - 1, b as usize - 1);
                    p[i * ng + j] += 1.0;
                    p[j * ng + i] += 1.0;
                }
            }
            p
        })
        .collect()
}

/// The 22 features averaged over directions that hold at least one pair.
///
/// A ROI without any neighbouring pair (a single voxel) is treated as a single
/// self co-occurrence. Single-cell matrices give Correlation 1 and Imc1/Imc2 0.
pub fn glcm_features(d: &DiscretizedRoi) -> Named {
    let ng = d.n_levels() as usize;
    let mut per_dir: Vec<Vec<f64>> = glcm_matrices(d)
        .into_iter()
        .filter(|p| p.iter().any(|&c| c > 0.0))
        .map(|p| features_from_matrix(&p, ng))
        .collect();
    if per_dir.is_empty() {
        let level = d.levels()[d.roi_indices()[0]] as usize - 1;
        let mut p = vec![0.0; ng * ng];
        p[level * ng + level] = 1.0;
        per_dir.push(features_from_matrix(&p, ng));
    }
    label_values(&GLCM_FEATURES, mean_of(&per_dir))
}

fn features_from_matrix(counts: &[f64], ng: usize) -> Vec<f64> {
    let total: f64 = counts.iter().sum();
    let p: Vec<f64> = counts.iter().map(|c| c / total).collect();
    let at = |i: usize, j: usize| p[i * ng + j];
    let lv = |k: usize| (k + 1) as f64;

    let mut px = vec![0.0; ng];
    let mut py = vec![0.0; ng];
    let mut p_sum = vec![0.0; 2 * ng + 1];
    let mut p_diff = vec![0.0; ng];
    for i in 0..ng {
        for j in 0..ng {
            let v = at(i, j);
            px[i] += v;
            py[j] += v;
            p_sum[i + j + 2] += v;
            p_diff[i.abs_diff(j)] += v;
        }
    }
    let mu_x: f64 = (0..ng).map(|i| lv(i) * px[i]).sum();
    let mu_y: f64 = (0..ng).map(|j| lv(j) * py[j]).sum();
    let var_x: f64 = (0..ng).map(|i| (lv(i) - mu_x).powi(2) * px[i]).sum();
    let var_y: f64 = (0..ng).map(|j| (lv(j) - mu_y).powi(2) * py[j]).sum();

    let mut autocorr = 0.0;
    let mut prominence = 0.0;
    let mut shade = 0.0;
    let mut tendency = 0.0;
    let mut contrast = 0.0;
    let mut energy = 0.0;
    let mut idm = 0.0;
    let mut idmn = 0.0;
    let mut id = 0.0;
    let mut idn = 0.0;
    let mut max_p: f64 = 0.0;
    let mut sum_squares = 0.0;
    let mut hxy1 = 0.0;
    let mut hxy2 = 0.0;
    let ngf = ng as f64;
    for i in 0..ng {
        for j in 0..ng {
            let v = at(i, j);
            let (a, b) = (lv(i), lv(j));
            let s = a + b - mu_x - mu_y;
            let diff = (a - b).abs();
            autocorr += v * a * b;
            prominence += v * s.powi(4);
            shade += v * s.powi(3);
            tendency += v * s.powi(2);
            contrast += v * diff * diff;
            energy += v * v;
            idm += v / (1.0 + diff * diff);
            idmn += v / (1.0 + diff * diff / (ngf * ngf));
            id += v / (1.0 + diff);
            idn += v / (1.0 + diff / ngf);
            max_p = max_p.max(v);
            sum_squares += v * (a - mu_x).powi(2);
            let pxy = px[i] * py[j];
            if pxy > 0.0 {
                if v > 0.0 {
                    hxy1 -= v * pxy.log2();
                }
                hxy2 -= pxy * pxy.log2();
            }
        }
    }
    let correlation = if var_x * var_y > 0.0 {
        (autocorr - mu_x * mu_y) / (var_x.sqrt() * var_y.sqrt())
    } else {
        1.0
    };
    let diff_avg: f64 = (0..ng).map(|k| k as f64 * p_diff[k]).sum();
    let diff_var: f64 = (0..ng).map(|k| (k as f64 - diff_avg).powi(2) * p_diff[k]).sum();
    let inv_var: f64 = (1..ng).map(|k| p_diff[k] / (k * k) as f64).sum();
    let hxy = entropy(p.iter().copied());
    let hx = entropy(px.iter().copied());
    let hy = entropy(py.iter().copied());
    let imc1 = if hx.max(hy) > 0.0 {
        (hxy - hxy1) / hx.max(hy)
    } else {
        0.0
    };
    let imc2 = (1.0 - (-2.0 * (hxy2 - hxy).max(0.0)).exp()).sqrt();

    vec![
        autocorr,
        mu_x,
        prominence,
        shade,
        tendency,
        contrast,
        correlation,
        diff_avg,
        entropy(p_diff.iter().copied()),
        diff_var,
        energy,
        hxy,
        imc1,
        imc2,
        idm,
        idmn,
        id,
        idn,
        inv_var,
        max_p,
        entropy(p_sum.iter().copied()),
        sum_squares,
    ]
}
