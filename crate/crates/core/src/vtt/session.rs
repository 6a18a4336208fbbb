use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use parking_lot::{Mutex, RwLock};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{binarize, Cohort, Presentation};
use crate::error::{Error, Result};

/// A slice of a volume file: `axis` 0 = x, 1 = y, 2 = z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceRef {
    pub axis: usize,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub case_id: String,
    pub presentation: Presentation,
    pub truth: Cohort,
    /// Volume file, relative to the session's payload directory.
    pub file: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice: Option<SliceRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaterInfo {
    pub id: String,
    #[serde(default)]
    pub years_practice: f64,
    #[serde(default)]
    pub synthetic_experience: bool,
}

/// Everything needed to reconstruct a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub id: String,
    pub seed: u64,
    pub raters: Vec<RaterInfo>,
    pub cases: Vec<CaseSpec>,
}

impl SessionConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: SessionConfig = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids: Vec<&str> = self.cases.iter().map(|c| c.case_id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate case ids".into()));
        }
        let mut raters: Vec<&str> = self.raters.iter().map(|r| r.id.as_str()).collect();
        raters.sort_unstable();
        if raters.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate rater ids".into()));
        }
        Ok(())
    }

    pub fn case(&self, id: &str) -> Option<&CaseSpec> {
        self.cases.iter().find(|c| c.case_id == id)
    }

    pub fn rater(&self, id: &str) -> Option<&RaterInfo> {
        self.raters.iter().find(|r| r.id == id)
    }

    /// Case indices in the order shown to `rater`: a shuffle seeded by the
    /// session seed on a stream derived from the rater id.
    pub fn order_for(&self, rater: &str) -> Vec<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(fnv1a(rater.as_bytes()));
        let mut order: Vec<usize> = (0..self.cases.len()).collect();
        order.shuffle(&mut rng);
        order
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub rater_id: String,
    pub case_id: String,
    pub score: u8,
    pub mode: Presentation,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
}

pub fn now_millis() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

type Snapshot = Arc<BTreeMap<(String, String), RatingRecord>>;

/// Append-only JSONL rating log. The in-memory view keeps the last record per
/// (rater, case). Writes serialize through one lock; readers take cheap
/// snapshots.
#[derive(Debug)]
pub struct Journal {
    path: Option<PathBuf>,
    writer: Mutex<Option<File>>,
    view: RwLock<Snapshot>,
}

impl Journal {
    pub fn in_memory() -> Self {
        Self {
            path: None,
            writer: Mutex::new(None),
            view: RwLock::new(Arc::default()),
        }
    }

    /// Replays an existing log (if any) and appends to it afterwards.
    pub fn open(path: &Path) -> Result<Self> {
        let mut view = BTreeMap::new();
        if path.exists() {
            for (n, line) in BufReader::new(File::open(path)?).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let r: RatingRecord = serde_json::from_str(&line)
                    .map_err(|e| Error::Format(format!("{}:{}: {e}", path.display(), n + 1)))?;
                view.insert((r.rater_id.clone(), r.case_id.clone()), r);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            path: Some(path.to_path_buf()),
            writer: Mutex::new(Some(file)),
            view: RwLock::new(Arc::new(view)),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn append(&self, record: RatingRecord) -> Result<()> {
        binarize(record.score)?;
        let mut w = self.writer.lock();
        if let Some(f) = w.as_mut() {
            let mut line = serde_json::to_vec(&record)?;
            line.push(b'\n');
            f.write_all(&line)?;
            f.flush()?;
        }
        let mut next = (**self.view.read()).clone();
        next.insert((record.rater_id.clone(), record.case_id.clone()), record);
        *self.view.write() = Arc::new(next);
        Ok(())
    }

    pub fn snapshot(&self) -> Snapshot {
        self.view.read().clone()
    }

    pub fn records(&self) -> Vec<RatingRecord> {
        self.snapshot().values().cloned().collect()
    }
}

/// Rater-facing view of the next case. Carries no truth and no cohort counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NextCase {
    pub case_id: String,
    pub presentation: Presentation,
    pub payload_url: String,
    pub position: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub rated: usize,
    pub total: usize,
}

#[derive(Debug)]
pub struct VttSession {
    pub config: SessionConfig,
    pub journal: Journal,
}

impl VttSession {
    pub fn new(config: SessionConfig, journal: Journal) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, journal })
    }

    fn known_rater(&self, rater: &str) -> Result<()> {
        self.config.rater(rater).map(|_| ()).ok_or_else(|| Error::UnknownName {
            kind: "rater",
            name: rater.to_string(),
        })
    }

    pub fn progress(&self, rater: &str) -> Result<Progress> {
        self.known_rater(rater)?;
        let snap = self.journal.snapshot();
        let rated = self
            .config
            .cases
            .iter()
            .filter(|c| snap.contains_key(&(rater.to_string(), c.case_id.clone())))
            .count();
        Ok(Progress { rated, total: self.config.cases.len() })
    }

    /// First unrated case in the rater's order, or `None` when done.
    pub fn next_case(&self, rater: &str) -> Result<Option<NextCase>> {
        self.known_rater(rater)?;
        let snap = self.journal.snapshot();
        let total = self.config.cases.len();
        for (pos, &i) in self.config.order_for(rater).iter().enumerate() {
            let c = &self.config.cases[i];
            if !snap.contains_key(&(rater.to_string(), c.case_id.clone())) {
                return Ok(Some(NextCase {
                    case_id: c.case_id.clone(),
                    presentation: c.presentation,
                    payload_url: format!("/session/{}/payload/{}", self.config.id, c.case_id),
                    position: pos + 1,
                    total,
                }));
            }
        }
        Ok(None)
    }

    pub fn submit(&self, rater: &str, case_id: &str, score: u8) -> Result<RatingRecord> {
        self.known_rater(rater)?;
        binarize(score)?;
        let case = self.config.case(case_id).ok_or_else(|| Error::UnknownName {
            kind: "case",
            name: case_id.to_string(),
        })?;
        let record = RatingRecord {
            rater_id: rater.to_string(),
            case_id: case_id.to_string(),
            score,
            mode: case.presentation,
            timestamp: now_millis(),
        };
        self.journal.append(record.clone())?;
        Ok(record)
    }
}

/// `rater,case,score,mode,timestamp` rows.
pub fn write_ratings_csv<W: Write>(records: &[RatingRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["rater", "case", "score", "mode", "timestamp"])?;
    for r in records {
        wr.write_record([
            r.rater_id.as_str(),
            r.case_id.as_str(),
            &r.score.to_string(),
            r.mode.as_str(),
            &r.timestamp.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
