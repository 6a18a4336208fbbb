use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radiomics::FeatureTable;

/// Lin's concordance correlation with population moments.
///
/// Two constant sequences give 1 when their means agree and 0 otherwise.
pub fn ccc(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "CCC needs at least 2 pairs, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let vx = x.iter().map(|v| (v - mx).powi(2)).sum::<f64>() / n;
    let vy = y.iter().map(|v| (v - my).powi(2)).sum::<f64>() / n;
    let cov = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / n;
    let den = vx + vy + (mx - my).powi(2);
    if den == 0.0 {
        return Ok(1.0);
    }
    if vx == 0.0 && vy == 0.0 {
        return Ok(0.0);
    }
    Ok((2.0 * cov / den).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CccCategory {
    Excellent,
    Good,
    Moderate,
    Poor,
}

impl CccCategory {
    pub fn of(c: f64) -> Self {
        if c >= 0.9 {
            CccCategory::Excellent
        } else if c >= 0.75 {
            CccCategory::Good
        } else if c >= 0.5 {
            CccCategory::Moderate
        } else {
            CccCategory::Poor
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CccCategory::Excellent => "excellent",
            CccCategory::Good => "good",
            CccCategory::Moderate => "moderate",
            CccCategory::Poor => "poor",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCounts {
    pub excellent: usize,
    pub good: usize,
    pub moderate: usize,
    pub poor: usize,
}

impl CategoryCounts {
    pub fn add(&mut self, c: CccCategory) {
        match c {
            CccCategory::Excellent => self.excellent += 1,
            CccCategory::Good => self.good += 1,
            CccCategory::Moderate => self.moderate += 1,
            CccCategory::Poor => self.poor += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.excellent + self.good + self.moderate + self.poor
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CccReport {
    pub per_feature: Vec<(String, f64)>,
    pub categories: CategoryCounts,
}

impl CccReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["feature", "ccc", "category"])?;
        for (name, c) in &self.per_feature {
            wr.write_record([name.as_str(), &format!("{c:?}"), CccCategory::of(*c).as_str()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// CCC per shared column, pairing rows by position.
pub fn ccc_report(real: &FeatureTable, synth: &FeatureTable) -> Result<CccReport> {
    if real.columns != synth.columns {
        return Err(Error::ShapeMismatch(
            "real and synthetic tables have different feature columns".into(),
        ));
    }
    if real.n_cases() != synth.n_cases() {
        return Err(Error::LengthMismatch {
            left: real.n_cases(),
            right: synth.n_cases(),
        });
    }
    let per_feature = (0..real.columns.len())
        .into_par_iter()
        .map(|j| Ok((real.columns[j].clone(), ccc(&real.column(j), &synth.column(j))?)))
        .collect::<Result<Vec<_>>>()?;
    let mut categories = CategoryCounts::default();
    for (_, c) in &per_feature {
        categories.add(CccCategory::of(*c));
    }
    Ok(CccReport {
        per_feature,
        categories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        assert_eq!(ccc(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        let c = ccc(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap();
        assert!((c - 4.0 / 7.0).abs() < 1e-15);
        assert_eq!(ccc(&[2.0, 2.0], &[2.0, 2.0]).unwrap(), 1.0);
        assert_eq!(ccc(&[2.0, 2.0], &[3.0, 3.0]).unwrap(), 0.0);
        assert!(ccc(&[1.0], &[1.0]).is_err());
        assert!(ccc(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn category_edges() {
        assert_eq!(CccCategory::of(0.9), CccCategory::Excellent);
        assert_eq!(CccCategory::of(0.75), CccCategory::Good);
        assert_eq!(CccCategory::of(0.5), CccCategory::Moderate);
        assert_eq!(CccCategory::of(0.49), CccCategory::Poor);
        assert_eq!(CccCategory::of(0.92), CccCategory::Excellent);
    }

    #[test]
    fn identical_tables_are_all_excellent() {
        let t = FeatureTable {
            columns: vec!["a".into(), "b".into()],
            cases: vec!["1".into(), "2".into(), "3".into()],
            rows: vec![vec![1.0, 5.0], vec![2.0, 5.0], vec![4.0, 5.0]],
        };
        let r = ccc_report(&t, &t).unwrap();
        assert_eq!(r.categories.excellent, 2);
        assert_eq!(r.categories.total(), 2);
    }
}
