use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaResult {
    pub kappa: f64,
    pub p_bar: f64,
    pub p_e: f64,
    /// Expected agreement is 1 (every rating in one category); κ is then
    /// reported as 1.
    pub degenerate: bool,
}

/// Fleiss' κ of a cases × categories count table.
pub fn fleiss_kappa(table: &[Vec<usize>]) -> Result<KappaResult> {
    let first = table
        .first()
        .ok_or_else(|| Error::InsufficientData("kappa needs at least one case".into()))?;
    let n: usize = first.iter().sum();
    if n < 2 {
        return Err(Error::InsufficientData(format!("kappa needs at least 2 raters per case, got {n}")));
    }
    let k = first.len();
    let mut totals = vec![0usize; k];
    let mut p_sum = 0.0;
    for (case, row) in table.iter().enumerate() {
        let found: usize = row.iter().sum();
        if found != n || row.len() != k {
            return Err(Error::UnequalRaterCounts { case, found, expected: n });
        }
        let sq: usize = row.iter().map(|c| c * c).sum();
        p_sum += (sq - n) as f64 / (n * (n - 1)) as f64;
        for (t, c) in totals.iter_mut().zip(row) {
            *t += c;
        }
    }
    let big_n = table.len() as f64;
    let p_bar = p_sum / big_n;
    let p_e: f64 = totals.iter().map(|&t| (t as f64 / (big_n * n as f64)).powi(2)).sum();
    if p_e >= 1.0 {
        return Ok(KappaResult { kappa: 1.0, p_bar, p_e, degenerate: true });
    }
    Ok(KappaResult {
        kappa: (p_bar - p_e) / (1.0 - p_e),
        p_bar,
        p_e,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0))
}

/// Two-sided Welch t-test.
pub fn t_test_independent(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "t-test needs at least 2 values per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    if va == 0.0 && vb == 0.0 {
        return Err(Error::DegenerateSample("both samples have zero variance".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (qa, qb) = (va / na, vb / nb);
    let t = (ma - mb) / (qa + qb).sqrt();
    let df = (qa + qb).powi(2) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::DegenerateSample(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(TTest { t, df, p })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U of the first sample: its rank sum minus `n(n + 1)/2`.
    pub u: f64,
    pub p: f64,
    pub exact: bool,
}

/// Largest sample size for which the exact null distribution is used.
pub const EXACT_LIMIT: usize = 20;

/// Midranks of the pooled sample, doubled so they are integers.
fn doubled_midranks(pooled: &[f64]) -> Vec<u64> {
    let mut idx: Vec<usize> = (0..pooled.len()).collect();
    idx.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0u64; pooled.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && pooled[idx[j + 1]] == pooled[idx[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 averaged, doubled
        let r2 = (i + 1 + j + 1) as u64;
        for &k in &idx[i..=j] {
            ranks[k] = r2;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided Mann–Whitney U. With both samples of size ≤ 20 the p-value is
/// `P(|U − nm/2| ≥ |U_obs − nm/2|)` under the exact permutation distribution
/// of the (tied) ranks; otherwise the tie-corrected normal approximation with
/// continuity correction is used.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("Mann-Whitney needs non-empty samples".into()));
    }
    let (n, m) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = doubled_midranks(&pooled);
    let r2: u64 = ranks[..n].iter().sum();
    let u = r2 as f64 / 2.0 - (n * (n + 1)) as f64 / 2.0;
    // |2U − nm| from a doubled rank sum
    let dev = |s2: u64| (s2 as i64 - (n * (n + 1)) as i64 - (n * m) as i64).abs();
    let observed = dev(r2);
    if n.max(m) <= EXACT_LIMIT {
        let max_sum: u64 = ranks.iter().sum::<u64>() + 1;
        // ways[k][s]: subsets of size k with doubled rank sum s
        let mut ways = vec![vec![0.0f64; max_sum as usize]; n + 1];
        ways[0][0] = 1.0;
        for (seen, &r) in ranks.iter().enumerate() {
            for k in (1..=n.min(seen + 1)).rev() {
                let (lo, hi) = ways.split_at_mut(k);
                let prev = &lo[k - 1];
                let cur = &mut hi[0];
                for s in (r as usize..max_sum as usize).rev() {
                    cur[s] += prev[s - r as usize];
                }
            }
        }
        let total: f64 = ways[n].iter().sum();
        let tail: f64 = ways[n]
            .iter()
            .enumerate()
            .filter(|(s, w)| **w > 0.0 && dev(*s as u64) >= observed)
            .map(|(_, w)| w)
            .sum();
        return Ok(MannWhitney { u, p: (tail / total).min(1.0), exact: true });
    }
    let nn = (n + m) as f64;
    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie += t * t * t - t;
        i = j + 1;
    }
    let var = (n * m) as f64 / 12.0 * ((nn + 1.0) - tie / (nn * (nn - 1.0)));
    if var <= 0.0 {
        return Ok(MannWhitney { u, p: 1.0, exact: false });
    }
    let z = (((u - (n * m) as f64 / 2.0).abs() - 0.5).max(0.0)) / var.sqrt();
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(MannWhitney {
        u,
        p: (2.0 * std.sf(z)).min(1.0),
        exact: false,
    })
}
