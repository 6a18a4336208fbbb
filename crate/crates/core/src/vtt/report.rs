use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    binarize, fleiss_kappa, mann_whitney_u, t_test_independent, Cohort, KappaResult, MannWhitney,
    Presentation, RatingRecord, SessionConfig, TTest,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub alpha: f64,
    /// Raters with more years of practice than this form the experienced group.
    pub experience_years: f64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self { alpha: 0.05, experience_years: 10.0 }
    }
}

impl ReportConfig {
    pub const PRESETS: [&'static str; 2] = ["default", "paper-strict"];

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(Self::default()),
            "paper-strict" => Ok(Self { alpha: 0.04, ..Self::default() }),
            _ => Err(Error::UnknownName { kind: "significance preset", name: name.to_string() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaterSummary {
    pub rater_id: String,
    pub rated: usize,
    pub complete: bool,
    /// Share of ratings whose binarized verdict matches the hidden truth.
    pub accuracy: Option<f64>,
    pub mean_score_real: Option<f64>,
    pub mean_score_synthetic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub welch: Option<TTest>,
    pub mann_whitney: Option<MannWhitney>,
    pub welch_significant: bool,
    pub mann_whitney_significant: bool,
    pub notes: Vec<String>,
}

impl GroupComparison {
    fn run(a: &[f64], b: &[f64], alpha: f64) -> Self {
        let mut notes = Vec::new();
        let welch = t_test_independent(a, b).map_err(|e| notes.push(format!("t-test: {e}"))).ok();
        let mann_whitney = mann_whitney_u(a, b).map_err(|e| notes.push(format!("Mann-Whitney: {e}"))).ok();
        Self {
            welch_significant: welch.is_some_and(|t| t.p < alpha),
            mann_whitney_significant: mann_whitney.is_some_and(|u| u.p < alpha),
            welch,
            mann_whitney,
            notes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairKappa {
    pub a: String,
    pub b: String,
    pub kappa: Option<KappaResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub alpha: f64,
    pub raters: Vec<RaterSummary>,
    pub incomplete: Vec<String>,
    /// κ over the cases of each mode rated by every rater.
    pub kappa_by_mode: BTreeMap<String, Option<KappaResult>>,
    pub pairwise_kappa: Vec<PairKappa>,
    /// Scores given to real cases against scores given to synthetic cases.
    pub real_vs_synthetic: GroupComparison,
    /// Per-rating correctness (1/0) of experienced against other raters.
    pub experience: GroupComparison,
}

fn mean(x: &[f64]) -> Option<f64> {
    (!x.is_empty()).then(|| x.iter().sum::<f64>() / x.len() as f64)
}

/// Binarized count table over cases every listed rater has rated.
fn kappa_over(
    cfg: &SessionConfig,
    by_key: &BTreeMap<(&str, &str), &RatingRecord>,
    raters: &[&str],
    mode: Option<Presentation>,
) -> Option<KappaResult> {
    let mut table = Vec::new();
    for c in &cfg.cases {
        if mode.is_some_and(|m| m != c.presentation) {
            continue;
        }
        let scores: Option<Vec<u8>> = raters
            .iter()
            .map(|r| by_key.get(&(*r, c.case_id.as_str())).map(|rec| rec.score))
            .collect();
        if let Some(scores) = scores {
            let real = scores.iter().filter(|s| binarize(**s).ok() == Some(Cohort::Real)).count();
            table.push(vec![real, scores.len() - real]);
        }
    }
    fleiss_kappa(&table).ok()
}

pub fn session_report(cfg: &SessionConfig, ratings: &[RatingRecord], rc: &ReportConfig) -> Result<SessionReport> {
    let mut by_key: BTreeMap<(&str, &str), &RatingRecord> = BTreeMap::new();
    for r in ratings {
        if cfg.case(&r.case_id).is_none() || cfg.rater(&r.rater_id).is_none() {
            return Err(Error::UnknownName {
                kind: "rating key",
                name: format!("{}/{}", r.rater_id, r.case_id),
            });
        }
        binarize(r.score)?;
        by_key.insert((r.rater_id.as_str(), r.case_id.as_str()), r);
    }

    let mut raters = Vec::new();
    let mut incomplete = Vec::new();
    let mut real_scores = Vec::new();
    let mut synth_scores = Vec::new();
    let mut experienced = Vec::new();
    let mut others = Vec::new();
    for rater in &cfg.raters {
        let mut correct = Vec::new();
        let mut real = Vec::new();
        let mut synth = Vec::new();
        for c in &cfg.cases {
            let Some(rec) = by_key.get(&(rater.id.as_str(), c.case_id.as_str())) else { continue };
            let s = f64::from(rec.score);
            let hit = f64::from(u8::from(binarize(rec.score)? == c.truth));
            correct.push(hit);
            match c.truth {
                Cohort::Real => real.push(s),
                Cohort::Synthetic => synth.push(s),
            }
        }
        let complete = correct.len() == cfg.cases.len();
        if !complete {
            incomplete.push(rater.id.clone());
        }
        raters.push(RaterSummary {
            rater_id: rater.id.clone(),
            rated: correct.len(),
            complete,
            accuracy: mean(&correct),
            mean_score_real: mean(&real),
            mean_score_synthetic: mean(&synth),
        });
        real_scores.extend(real);
        synth_scores.extend(synth);
        if rater.years_practice > rc.experience_years {
            experienced.extend(correct);
        } else {
            others.extend(correct);
        }
    }

    let ids: Vec<&str> = cfg.raters.iter().map(|r| r.id.as_str()).collect();
    let mut kappa_by_mode = BTreeMap::new();
    for mode in [Presentation::Slice, Presentation::Volume] {
        if cfg.cases.iter().any(|c| c.presentation == mode) {
            kappa_by_mode.insert(mode.as_str().to_string(), kappa_over(cfg, &by_key, &ids, Some(mode)));
        }
    }
    let mut pairwise_kappa = Vec::new();
    for (i, a) in ids.iter().enumerate() {
        for b in &ids[i + 1..] {
            pairwise_kappa.push(PairKappa {
                a: a.to_string(),
                b: b.to_string(),
                kappa: kappa_over(cfg, &by_key, &[a, b], None),
            });
        }
    }

    Ok(SessionReport {
        alpha: rc.alpha,
        raters,
        incomplete,
        kappa_by_mode,
        pairwise_kappa,
        real_vs_synthetic: GroupComparison::run(&real_scores, &synth_scores, rc.alpha),
        experience: GroupComparison::run(&experienced, &others, rc.alpha),
    })
}
