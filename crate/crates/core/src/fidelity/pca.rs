use std::io::Write;

use nalgebra::{DMatrix, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radiomics::FeatureTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaReport {
    pub real: Vec<[f64; 2]>,
    pub synth: Vec<[f64; 2]>,
    pub centroid_distance: f64,
    /// Fraction of standardized variance captured by each component.
    pub explained: [f64; 2],
    /// Columns kept after dropping zero-variance features.
    pub columns_used: usize,
}

impl PcaReport {
    /// Projected points as `cohort,pc1,pc2` rows.
    pub fn write_scatter_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["cohort", "pc1", "pc2"])?;
        for (cohort, pts) in [("real", &self.real), ("synthetic", &self.synth)] {
            for p in pts {
                wr.write_record([cohort, &format!("{:?}", p[0]), &format!("{:?}", p[1])])?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// Z-scores the pooled cohorts, drops constant columns, projects on the two
/// leading principal components and measures the distance between the cohort
/// centroids. Each component's largest-magnitude loading is made positive.
pub fn pca_distance(real: &FeatureTable, synth: &FeatureTable) -> Result<PcaReport> {
    if real.columns != synth.columns {
        return Err(Error::ShapeMismatch(
            "real and synthetic tables have different feature columns".into(),
        ));
    }
    if real.n_cases() < 2 || synth.n_cases() < 2 {
        return Err(Error::InsufficientData(format!(
            "each cohort needs at least 2 rows (got {} and {})",
            real.n_cases(),
            synth.n_cases()
        )));
    }
    let rows: Vec<&Vec<f64>> = real.rows.iter().chain(&synth.rows).collect();
    let n = rows.len();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for j in 0..real.columns.len() {
        let c: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let mean = c.iter().sum::<f64>() / n as f64;
        let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !(var > (1e-12 * scale).powi(2)) {
            continue;
        }
        let sd = var.sqrt();
        cols.push(c.iter().map(|v| (v - mean) / sd).collect());
    }
    let p = cols.len();
    let mut proj = vec![[0.0; 2]; n];
    let mut explained = [0.0; 2];
    if p > 0 {
        let z = DMatrix::from_fn(n, p, |i, j| cols[j][i]);
        let svd = SVD::new(z.clone(), false, true);
        let vt = svd.v_t.as_ref().expect("requested V^T");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let total: f64 = svd.singular_values.iter().map(|s| s * s).sum();
        for (k, &c) in order.iter().take(2).enumerate() {
            let mut v: Vec<f64> = vt.row(c).iter().copied().collect();
            let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            for (i, pt) in proj.iter_mut().enumerate() {
                pt[k] = (0..p).map(|j| z[(i, j)] * v[j]).sum();
            }
            if total > 0.0 {
                explained[k] = svd.singular_values[c].powi(2) / total;
            }
        }
    }
    let (pr, ps) = proj.split_at(real.n_cases());
    let centroid = |pts: &[[f64; 2]]| {
        let m = pts.len() as f64;
        [pts.iter().map(|p| p[0]).sum::<f64>() / m, pts.iter().map(|p| p[1]).sum::<f64>() / m]
    };
    let (a, b) = (centroid(pr), centroid(ps));
    Ok(PcaReport {
        real: pr.to_vec(),
        synth: ps.to_vec(),
        centroid_distance: ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt(),
        explained,
        columns_used: p,
    })
}
