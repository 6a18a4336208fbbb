use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::LabelMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DscMode {
    /// Labels merged into structure groups before comparison.
    Semantic,
    /// Raw labels compared one by one.
    Instance,
}

/// Label names for instance mode and label groups for semantic mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupMap {
    pub labels: BTreeMap<u32, String>,
    pub groups: Vec<(String, Vec<u32>)>,
}

impl GroupMap {
    /// Head-and-neck bone labels: 1 skull, 2/3 clavicula L/R, 4–16 vertebrae
    /// C1–T6, 17 spinal canal, 18–23 ribs L1–6, 24–29 ribs R1–6, 30 sternum,
    /// 31 costal cartilages.
    pub fn bone_default() -> Self {
        let mut labels = BTreeMap::new();
        labels.insert(1, "Skull".to_string());
        labels.insert(2, "Clavicula_L".to_string());
        labels.insert(3, "Clavicula_R".to_string());
        let vert = ["C1", "C2", "C3", "C4", "C5", "C6", "C7", "T1", "T2", "T3", "T4", "T5", "T6"];
        for (i, v) in vert.iter().enumerate() {
            labels.insert(4 + i as u32, format!("Vertebra_{v}"));
        }
        labels.insert(17, "SpinalCanal".to_string());
        for i in 0..6u32 {
            labels.insert(18 + i, format!("Rib_L{}", i + 1));
            labels.insert(24 + i, format!("Rib_R{}", i + 1));
        }
        labels.insert(30, "Sternum".to_string());
        labels.insert(31, "CostalCartilages".to_string());
        let groups = vec![
            ("Skull".to_string(), vec![1]),
            ("Clavicula".to_string(), vec![2, 3]),
            ("Vertebrae".to_string(), (4..=16).collect()),
            ("SpinalCanal".to_string(), vec![17]),
            ("Ribs".to_string(), (18..=29).collect()),
            ("Sternum".to_string(), vec![30]),
            ("CostalCartilages".to_string(), vec![31]),
        ];
        Self { labels, groups }
    }

    /// Every named label is its own group.
    pub fn identity(labels: BTreeMap<u32, String>) -> Self {
        let groups = labels.iter().map(|(l, n)| (n.clone(), vec![*l])).collect();
        Self { labels, groups }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DscReport {
    pub mode: DscMode,
    pub per_structure: Vec<(String, f64)>,
}

impl DscReport {
    pub fn mean(&self) -> f64 {
        if self.per_structure.is_empty() {
            return f64::NAN;
        }
        self.per_structure.iter().map(|(_, d)| d).sum::<f64>() / self.per_structure.len() as f64
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["structure", "dsc"])?;
        for (n, d) in &self.per_structure {
            wr.write_record([n.as_str(), &format!("{d:?}")])?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn dice(p: usize, g: usize, both: usize) -> f64 {
    if p + g == 0 {
        1.0
    } else {
        2.0 * both as f64 / (p + g) as f64
    }
}

/// Dice per structure. Instance mode reports every named label plus any other
/// non-zero label found in either mask; semantic mode reports each group.
/// A structure absent from both masks scores 1.
pub fn dsc(pred: &LabelMask, gt: &LabelMask, mode: DscMode, map: &GroupMap) -> Result<DscReport> {
    pred.geometry().ensure_matches(&gt.geometry())?;
    // (pred count, gt count, overlap) per raw label pair tally
    let mut counts: BTreeMap<u32, [usize; 3]> = BTreeMap::new();
    let mut joint: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    for (&p, &g) in pred.labels().iter().zip(gt.labels()) {
        if p != 0 {
            counts.entry(p).or_default()[0] += 1;
        }
        if g != 0 {
            counts.entry(g).or_default()[1] += 1;
        }
        if p != 0 && g != 0 {
            if p == g {
                counts.entry(p).or_default()[2] += 1;
            }
            *joint.entry((p, g)).or_default() += 1;
        }
    }
    let per_structure = match mode {
        DscMode::Instance => {
            let mut labels: Vec<u32> = map.labels.keys().copied().collect();
            labels.extend(counts.keys().copied());
            labels.sort_unstable();
            labels.dedup();
            labels
                .into_iter()
                .map(|l| {
                    let [p, g, both] = counts.get(&l).copied().unwrap_or_default();
                    let name = map.labels.get(&l).cloned().unwrap_or_else(|| format!("label_{l}"));
                    (name, dice(p, g, both))
                })
                .collect()
        }
        DscMode::Semantic => map
            .groups
            .iter()
            .map(|(name, members)| {
                let has = |l: &u32| members.contains(l);
                let p: usize = counts.iter().filter(|(l, _)| has(l)).map(|(_, c)| c[0]).sum();
                let g: usize = counts.iter().filter(|(l, _)| has(l)).map(|(_, c)| c[1]).sum();
                let both: usize = joint
                    .iter()
                    .filter(|((a, b), _)| has(a) && has(b))
                    .map(|(_, n)| n)
                    .sum();
                (name.clone(), dice(p, g, both))
            })
            .collect(),
    };
    Ok(DscReport { mode, per_structure })
}

/// Case-mean of per-structure Dice over reports sharing structure names.
pub fn dsc_mean(reports: &[DscReport]) -> Result<DscReport> {
    let first = reports
        .first()
        .ok_or_else(|| Error::InsufficientData("no DSC reports to average".into()))?;
    let mut sums: Vec<(String, f64)> = first.per_structure.iter().map(|(n, _)| (n.clone(), 0.0)).collect();
    for r in reports {
        if r.mode != first.mode
            || r.per_structure.len() != sums.len()
            || r.per_structure.iter().zip(&sums).any(|((a, _), (b, _))| a != b)
        {
            return Err(Error::ShapeMismatch("DSC reports list different structures".into()));
        }
        for ((_, d), (_, s)) in r.per_structure.iter().zip(sums.iter_mut()) {
            *s += d;
        }
    }
    let n = reports.len() as f64;
    Ok(DscReport {
        mode: first.mode,
        per_structure: sums.into_iter().map(|(k, s)| (k, s / n)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::Geometry;

    fn mask(labels: Vec<u32>) -> LabelMask {
        LabelMask::new(Geometry::isotropic([labels.len(), 1, 1]), labels).unwrap()
    }

    fn get(r: &DscReport, n: &str) -> f64 {
        r.per_structure.iter().find(|(k, _)| k == n).unwrap().1
    }

    #[test]
    fn overlap_two_of_three() {
        let p = mask(vec![1, 1, 1, 0]);
        let g = mask(vec![0, 1, 1, 1]);
        let r = dsc(&p, &g, DscMode::Instance, &GroupMap::identity(BTreeMap::new())).unwrap();
        assert!((get(&r, "label_1") - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn left_right_swap_differs_by_mode() {
        let map = GroupMap::bone_default();
        let p = mask(vec![2, 2, 3, 3, 0]);
        let g = mask(vec![3, 3, 2, 2, 0]);
        let inst = dsc(&p, &g, DscMode::Instance, &map).unwrap();
        assert_eq!(get(&inst, "Clavicula_L"), 0.0);
        assert_eq!(get(&inst, "Skull"), 1.0, "absent on both sides");
        let sem = dsc(&p, &g, DscMode::Semantic, &map).unwrap();
        assert_eq!(get(&sem, "Clavicula"), 1.0);
    }

    #[test]
    fn group_map_json_round_trip() {
        let m = GroupMap::bone_default();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(GroupMap::from_json(&s).unwrap(), m);
        assert_eq!(m.labels.len(), 31);
    }

    #[test]
    fn case_mean() {
        let a = DscReport { mode: DscMode::Instance, per_structure: vec![("x".into(), 1.0)] };
        let b = DscReport { mode: DscMode::Instance, per_structure: vec![("x".into(), 0.5)] };
        assert_eq!(dsc_mean(&[a, b]).unwrap().per_structure[0].1, 0.75);
    }
}
