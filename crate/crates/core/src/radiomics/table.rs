use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::FeatureVector;
use crate::error::{Error, Result};

/// Rows are cases, columns are features. CSV layout: a `case` column followed
/// by one column per feature name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub columns: Vec<String>,
    pub cases: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn from_vectors(cases: Vec<String>, vectors: &[FeatureVector]) -> Result<Self> {
        if cases.len() != vectors.len() {
            return Err(Error::LengthMismatch {
                left: cases.len(),
                right: vectors.len(),
            });
        }
        let columns: Vec<String> = vectors
            .first()
            .map(|v| v.entries.iter().map(|(n, _)| n.clone()).collect())
            .unwrap_or_default();
        let mut rows = Vec::with_capacity(vectors.len());
        for (case, v) in cases.iter().zip(vectors) {
            if v.len() != columns.len() || v.entries.iter().zip(&columns).any(|((n, _), c)| n != c) {
                return Err(Error::ShapeMismatch(format!(
                    "case {case} does not share the feature manifest of the first case"
                )));
            }
            rows.push(v.values());
        }
        Ok(Self { columns, cases, rows })
    }

    pub fn n_cases(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(std::iter::once("case").chain(self.columns.iter().map(String::as_str)))?;
        for (case, row) in self.cases.iter().zip(&self.rows) {
            let mut rec = vec![case.clone()];
            rec.extend(row.iter().map(|x| format!("{x:?}")));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        if header.get(0) != Some("case") {
            return Err(Error::Format("feature table must start with a `case` column".into()));
        }
        let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut cases = Vec::new();
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            cases.push(rec[0].to_string());
            let row = rec
                .iter()
                .skip(1)
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Format(format!("not a number: {s:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Self { columns, cases, rows })
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(vals: [f64; 2]) -> FeatureVector {
        FeatureVector {
            manifest_id: "m".into(),
            entries: vec![("a".into(), vals[0]), ("b".into(), vals[1])],
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = FeatureTable::from_vectors(
            vec!["c1".into(), "c2".into()],
            &[fv([0.1, 1e-300]), fv([-3.0, 2.0 / 3.0])],
        )
        .unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("case,a,b\n"));
        assert_eq!(FeatureTable::read_csv(&buf[..]).unwrap(), t);
        let mut js = Vec::new();
        t.write_json(&mut js).unwrap();
        assert_eq!(FeatureTable::read_json(&js[..]).unwrap(), t);
    }

    #[test]
    fn mismatched_manifests_rejected() {
        let mut other = fv([1.0, 2.0]);
        other.entries[1].0 = "c".into();
        let r = FeatureTable::from_vectors(vec!["x".into(), "y".into()], &[fv([1.0, 2.0]), other]);
        assert!(r.is_err());
    }
}
