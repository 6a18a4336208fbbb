//! Visual Turing Test: sessions with hidden truth, rating ingestion and the
//! agreement and significance statistics over the collected ratings.

mod report;
mod session;
mod stats;

pub use report::{session_report, GroupComparison, PairKappa, RaterSummary, ReportConfig, SessionReport};
pub use session::{
    now_millis, write_ratings_csv, CaseSpec, Journal, NextCase, Progress, RaterInfo, RatingRecord,
    SessionConfig, SliceRef, VttSession,
};
pub use stats::{fleiss_kappa, mann_whitney_u, t_test_independent, KappaResult, MannWhitney, TTest, EXACT_LIMIT};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cohort {
    Real,
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Presentation {
    Slice,
    Volume,
}

impl Presentation {
    pub fn as_str(self) -> &'static str {
        match self {
            Presentation::Slice => "slice",
            Presentation::Volume => "volume",
        }
    }
}

/// Scores 1..=5 read as real, 6..=10 as synthetic.
pub fn binarize(score: u8) -> Result<Cohort> {
    match score {
        1..=5 => Ok(Cohort::Real),
        6..=10 => Ok(Cohort::Synthetic),
        _ => Err(Error::OutOfRange { value: f64::from(score), lo: 1.0, hi: 10.0 }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    #[test]
    fn threshold() {
        assert_eq!(binarize(5).unwrap(), Cohort::Real);
        assert_eq!(binarize(6).unwrap(), Cohort::Synthetic);
        assert_eq!(binarize(1).unwrap(), Cohort::Real);
        assert!(binarize(0).is_err());
        assert!(binarize(11).is_err());
    }

    fn cfg() -> SessionConfig {
        SessionConfig {
            id: "t".into(),
            seed: 1,
            raters: vec![
                RaterInfo { id: "a".into(), years_practice: 20.0, synthetic_experience: false },
                RaterInfo { id: "b".into(), years_practice: 2.0, synthetic_experience: false },
            ],
            cases: (0..6)
                .map(|i| CaseSpec {
                    case_id: format!("c{i}"),
                    presentation: Presentation::Volume,
                    truth: if i < 3 { Cohort::Real } else { Cohort::Synthetic },
                    file: PathBuf::from("x.nii"),
                    slice: None,
                })
                .collect(),
        }
    }

    fn rec(r: &str, c: usize, score: u8) -> RatingRecord {
        RatingRecord {
            rater_id: r.into(),
            case_id: format!("c{c}"),
            score,
            mode: Presentation::Volume,
            timestamp: 0,
        }
    }

    #[test]
    fn perfect_rater_and_identical_pair() {
        let cfg = cfg();
        let mut ratings = Vec::new();
        for c in 0..6 {
            let s = if c < 3 { 1 } else { 10 };
            ratings.push(rec("a", c, s));
            ratings.push(rec("b", c, s));
        }
        let r = session_report(&cfg, &ratings, &ReportConfig::default()).unwrap();
        assert_eq!(r.raters[0].accuracy, Some(1.0));
        assert_eq!(r.pairwise_kappa[0].kappa.unwrap().kappa, 1.0);
        assert!(r.incomplete.is_empty());
        assert_eq!(r.real_vs_synthetic.mann_whitney.unwrap().u, 0.0);
    }

    #[test]
    fn incomplete_flagged() {
        let r = session_report(&cfg(), &[rec("a", 0, 3)], &ReportConfig::preset("paper-strict").unwrap()).unwrap();
        assert_eq!(r.incomplete, vec!["a".to_string(), "b".to_string()]);
        assert_eq!(r.alpha, 0.04);
    }
}
