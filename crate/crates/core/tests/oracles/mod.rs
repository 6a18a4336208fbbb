//! Independent reference implementations written directly from the textbook
//! definitions. They favour obviousness over speed: pair enumeration instead
//! of offset tables, explicit subset enumeration instead of dynamic programs.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

pub type Feats = BTreeMap<String, f64>;

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Mismatching names, with both values, between a library result and an oracle.
pub fn compare(prefix: &str, lib: &[(&str, f64)], oracle: &Feats, rel: f64) -> Vec<String> {
    let mut bad = Vec::new();
    if lib.len() != oracle.len() {
        bad.push(format!("{prefix}: {} features vs oracle {}", lib.len(), oracle.len()));
    }
    for (name, v) in lib {
        match oracle.get(*name) {
            Some(o) if close(*v, *o, rel) => {}
            Some(o) => bad.push(format!("{prefix}_{name}: {v} vs oracle {o}")),
            None => bad.push(format!("{prefix}_{name}: missing from oracle")),
        }
    }
    bad
}

/// ROI as (position, value) pairs, positions in voxel units.
#[derive(Clone)]
pub struct Roi {
    pub voxels: Vec<([i64; 3], f64)>,
    pub spacing: [f64; 3],
}

impl Roi {
    pub fn levels(&self, bin_width: f64) -> Vec<([i64; 3], usize)> {
        let min = self.voxels.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        self.voxels
            .iter()
            .map(|(p, x)| (*p, ((x - min) / bin_width).floor() as usize + 1))
            .collect()
    }
}

fn h(p: impl Iterator<Item = f64>) -> f64 {
    p.filter(|&x| x > 0.0).map(|x| -x * x.log2()).sum()
}

fn named(names: &[&str], vals: Vec<f64>) -> Feats {
    names.iter().map(|n| n.to_string()).zip(vals).collect()
}

fn chebyshev1(a: [i64; 3], b: [i64; 3]) -> bool {
    a != b && (0..3).all(|k| (a[k] - b[k]).abs() <= 1)
}

pub fn first_order(roi: &Roi, bin_width: f64) -> Feats {
    let x: Vec<f64> = roi.voxels.iter().map(|v| v.1).collect();
    let n = x.len() as f64;
    let mut s = x.clone();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pct = |q: f64| {
        let pos = q * (s.len() - 1) as f64;
        let i = pos as usize;
        if i + 1 >= s.len() {
            s[s.len() - 1]
        } else {
            s[i] * (1.0 - (pos - i as f64)) + s[i + 1] * (pos - i as f64)
        }
    };
    let mean = x.iter().sum::<f64>() / n;
    let mom = |k: i32| x.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / n;
    let (m2, m3, m4) = (mom(2), mom(3), mom(4));
    let energy: f64 = x.iter().map(|v| v * v).sum();
    let (p10, p90) = (pct(0.1), pct(0.9));
    let inner: Vec<f64> = x.iter().copied().filter(|v| *v >= p10 && *v <= p90).collect();
    let im = inner.iter().sum::<f64>() / inner.len() as f64;
    let mut hist: BTreeMap<usize, f64> = BTreeMap::new();
    for (_, l) in roi.levels(bin_width) {
        *hist.entry(l).or_default() += 1.0 / n;
    }
    let vv = roi.spacing.iter().product::<f64>();
    named(
        &[
            "Energy", "TotalEnergy", "Entropy", "Minimum", "10Percentile", "90Percentile", "Maximum", "Mean",
            "Median", "InterquartileRange", "Range", "MeanAbsoluteDeviation", "RobustMeanAbsoluteDeviation",
            "RootMeanSquared", "Skewness", "Kurtosis", "Variance", "Uniformity",
        ],
        vec![
            energy,
            energy * vv,
            h(hist.values().copied()),
            s[0],
            p10,
            p90,
            s[s.len() - 1],
            mean,
            pct(0.5),
            pct(0.75) - pct(0.25),
            s[s.len() - 1] - s[0],
            x.iter().map(|v| (v - mean).abs()).sum::<f64>() / n,
            inner.iter().map(|v| (v - im).abs()).sum::<f64>() / inner.len() as f64,
            (energy / n).sqrt(),
            if m2 == 0.0 { 0.0 } else { m3 / m2.powf(1.5) },
            if m2 == 0.0 { 0.0 } else { m4 / (m2 * m2) },
            m2,
            hist.values().map(|p| p * p).sum(),
        ],
    )
}

/// 13 directions: the lexicographically positive half of the 26 offsets.
pub fn half_directions() -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    for dz in -1..=1i64 {
        for dy in -1..=1i64 {
            for dx in -1..=1i64 {
                let d = [dx, dy, dz];
                let first_nonzero = [dz, dy, dx].into_iter().find(|c| *c != 0);
                if first_nonzero == Some(1) {
                    out.push(d);
                }
            }
        }
    }
    out
}

pub fn glcm(roi: &Roi, bin_width: f64) -> Feats {
    let lv = roi.levels(bin_width);
    let ng = lv.iter().map(|v| v.1).max().unwrap();
    let mut per_dir: Vec<Vec<f64>> = Vec::new();
    for d in half_directions() {
        let mut p = vec![vec![0.0; ng + 1]; ng + 1];
        let mut any = false;
        for (pa, la) in &lv {
            for (pb, lb) in &lv {
                let diff = [pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]];
                if diff == d || diff == [-d[0], -d[1], -d[2]] {
                    p[*la][*lb] += 1.0;
                    any = true;
                }
            }
        }
        if any {
            per_dir.push(glcm_from(&p, ng));
        }
    }
    if per_dir.is_empty() {
        let mut p = vec![vec![0.0; ng + 1]; ng + 1];
        p[lv[0].1][lv[0].1] = 1.0;
        per_dir.push(glcm_from(&p, ng));
    }
    let k = per_dir.len() as f64;
    let avg: Vec<f64> = (0..22).map(|f| per_dir.iter().map(|r| r[f]).sum::<f64>() / k).collect();
    named(
        &[
            "Autocorrelation", "JointAverage", "ClusterProminence", "ClusterShade", "ClusterTendency", "Contrast",
            "Correlation", "DifferenceAverage", "DifferenceEntropy", "DifferenceVariance", "JointEnergy",
            "JointEntropy", "Imc1", "Imc2", "Idm", "Idmn", "Id", "Idn", "InverseVariance", "MaximumProbability",
            "SumEntropy", "SumSquares",
        ],
        avg,
    )
}

/// `counts[i][j]` with 1-based levels, index 0 unused.
fn glcm_from(counts: &[Vec<f64>], ng: usize) -> Vec<f64> {
    let total: f64 = counts.iter().flatten().sum();
    let p = |i: usize, j: usize| counts[i][j] / total;
    let levels = 1..=ng;
    let px = |i: usize| levels.clone().map(|j| p(i, j)).sum::<f64>();
    let py = |j: usize| levels.clone().map(|i| p(i, j)).sum::<f64>();
    let ux: f64 = levels.clone().map(|i| i as f64 * px(i)).sum();
    let uy: f64 = levels.clone().map(|j| j as f64 * py(j)).sum();
    let sx: f64 = levels.clone().map(|i| (i as f64 - ux).powi(2) * px(i)).sum::<f64>().sqrt();
    let sy: f64 = levels.clone().map(|j| (j as f64 - uy).powi(2) * py(j)).sum::<f64>().sqrt();
    let pairs: Vec<(usize, usize, f64)> = levels
        .clone()
        .flat_map(|i| levels.clone().map(move |j| (i, j)))
        .map(|(i, j)| (i, j, p(i, j)))
        .collect();
    let sum_over = |f: &dyn Fn(f64, f64, f64) -> f64| pairs.iter().map(|&(i, j, v)| f(i as f64, j as f64, v)).sum::<f64>();
    let pdiff = |k: usize| pairs.iter().filter(|(i, j, _)| i.abs_diff(*j) == k).map(|t| t.2).sum::<f64>();
    let psum = |k: usize| pairs.iter().filter(|(i, j, _)| i + j == k).map(|t| t.2).sum::<f64>();
    let da: f64 = (0..ng).map(|k| k as f64 * pdiff(k)).sum();
    let hx = h(levels.clone().map(px));
    let hy = h(levels.clone().map(py));
    let hxy = h(pairs.iter().map(|t| t.2));
    let hxy1: f64 = pairs
        .iter()
        .filter(|t| t.2 > 0.0)
        .map(|&(i, j, v)| -v * (px(i) * py(j)).log2())
        .sum();
    let hxy2 = h(pairs.iter().map(|&(i, j, _)| px(i) * py(j)));
    let ngf = ng as f64;
    vec![
        sum_over(&|i, j, v| i * j * v),
        ux,
        sum_over(&|i, j, v| (i + j - ux - uy).powi(4) * v),
        sum_over(&|i, j, v| (i + j - ux - uy).powi(3) * v),
        sum_over(&|i, j, v| (i + j - ux - uy).powi(2) * v),
        sum_over(&|i, j, v| (i - j).powi(2) * v),
        if sx * sy == 0.0 { 1.0 } else { (sum_over(&|i, j, v| i * j * v) - ux * uy) / (sx * sy) },
        da,
        h((0..ng).map(pdiff)),
        (0..ng).map(|k| (k as f64 - da).powi(2) * pdiff(k)).sum(),
        sum_over(&|_, _, v| v * v),
        hxy,
        if hx.max(hy) == 0.0 { 0.0 } else { (hxy - hxy1) / hx.max(hy) },
        if hxy2 > hxy { (1.0 - (-2.0 * (hxy2 - hxy)).exp()).sqrt() } else { 0.0 },
        sum_over(&|i, j, v| v / (1.0 + (i - j).powi(2))),
        sum_over(&|i, j, v| v / (1.0 + (i - j).powi(2) / (ngf * ngf))),
        sum_over(&|i, j, v| v / (1.0 + (i - j).abs())),
        sum_over(&|i, j, v| v / (1.0 + (i - j).abs() / ngf)),
        (1..ng).map(|k| pdiff(k) / (k * k) as f64).sum(),
        pairs.iter().map(|t| t.2).fold(0.0, f64::max),
        h((2..=2 * ng).map(psum)),
        sum_over(&|i, _, v| (i - ux).powi(2) * v),
    ]
}

/// Features of a (level, length) or (level, dependence) count table, shared
/// by the run-length and dependence families, given the normaliser.
fn emphasis(m: &BTreeMap<(usize, usize), f64>) -> (f64, Vec<f64>) {
    let total: f64 = m.values().sum();
    let p = |v: f64| v / total;
    let ui: f64 = m.iter().map(|(&(i, _), &v)| i as f64 * p(v)).sum();
    let uj: f64 = m.iter().map(|(&(_, j), &v)| j as f64 * p(v)).sum();
    let s = |f: &dyn Fn(f64, f64) -> f64| m.iter().map(|(&(i, j), &v)| p(v) * f(i as f64, j as f64)).sum::<f64>();
    let mut rows: BTreeMap<usize, f64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, f64> = BTreeMap::new();
    for (&(i, j), &v) in m {
        *rows.entry(i).or_default() += v;
        *cols.entry(j).or_default() += v;
    }
    let gln: f64 = rows.values().map(|r| r * r).sum::<f64>() / total;
    let cn: f64 = cols.values().map(|c| c * c).sum::<f64>() / total;
    (
        total,
        vec![
            s(&|_, j| 1.0 / (j * j)),
            s(&|_, j| j * j),
            gln,
            gln / total,
            cn,
            cn / total,
            s(&|i, _| (i - ui).powi(2)),
            s(&|_, j| (j - uj).powi(2)),
            h(m.values().map(|&v| p(v))),
            s(&|i, _| 1.0 / (i * i)),
            s(&|i, _| i * i),
            s(&|i, j| 1.0 / (i * i * j * j)),
            s(&|i, j| i * i / (j * j)),
            s(&|i, j| j * j / (i * i)),
            s(&|i, j| i * i * j * j),
        ],
    )
}

pub fn glrlm(roi: &Roi, bin_width: f64) -> Feats {
    let lv = roi.levels(bin_width);
    let at: BTreeMap<[i64; 3], usize> = lv.iter().copied().collect();
    let mut acc = vec![0.0; 16];
    let dirs = half_directions();
    for d in &dirs {
        // Each maximal segment is counted once, from its member with the
        // smallest projection on d.
        let mut runs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut seen: HashSet<[i64; 3]> = HashSet::new();
        for (p, l) in &lv {
            if seen.contains(p) {
                continue;
            }
            let mut members = vec![*p];
            for sgn in [-1i64, 1] {
                let mut q = *p;
                loop {
                    q = [q[0] + sgn * d[0], q[1] + sgn * d[1], q[2] + sgn * d[2]];
                    if at.get(&q) == Some(l) {
                        members.push(q);
                    } else {
                        break;
                    }
                }
            }
            seen.extend(members.iter().copied());
            *runs.entry((*l, members.len())).or_default() += 1.0;
        }
        let (nr, e) = emphasis(&runs);
        // SRE LRE GLN GLNN RLN RLNN RP GLV RV RE LGLRE HGLRE SRLGLE SRHGLE LRLGLE LRHGLE
        let v = [
            e[0], e[1], e[2], e[3], e[4], e[5], nr / lv.len() as f64, e[6], e[7], e[8], e[9], e[10], e[11], e[12],
            e[13], e[14],
        ];
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x / dirs.len() as f64;
        }
    }
    named(
        &[
            "ShortRunEmphasis", "LongRunEmphasis", "GrayLevelNonUniformity", "GrayLevelNonUniformityNormalized",
            "RunLengthNonUniformity", "RunLengthNonUniformityNormalized", "RunPercentage", "GrayLevelVariance",
            "RunVariance", "RunEntropy", "LowGrayLevelRunEmphasis", "HighGrayLevelRunEmphasis",
            "ShortRunLowGrayLevelEmphasis", "ShortRunHighGrayLevelEmphasis", "LongRunLowGrayLevelEmphasis",
            "LongRunHighGrayLevelEmphasis",
        ],
        acc,
    )
}

pub fn gldm(roi: &Roi, bin_width: f64) -> Feats {
    let lv = roi.levels(bin_width);
    let mut m: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (p, l) in &lv {
        let dep = 1 + lv.iter().filter(|(q, k)| k == l && chebyshev1(*p, *q)).count();
        *m.entry((*l, dep)).or_default() += 1.0;
    }
    let (_, e) = emphasis(&m);
    named(
        &[
            "SmallDependenceEmphasis", "LargeDependenceEmphasis", "GrayLevelNonUniformity", "DependenceNonUniformity",
            "DependenceNonUniformityNormalized", "GrayLevelVariance", "DependenceVariance", "DependenceEntropy",
            "LowGrayLevelEmphasis", "HighGrayLevelEmphasis", "SmallDependenceLowGrayLevelEmphasis",
            "SmallDependenceHighGrayLevelEmphasis", "LargeDependenceLowGrayLevelEmphasis",
            "LargeDependenceHighGrayLevelEmphasis",
        ],
        vec![e[0], e[1], e[2], e[4], e[5], e[6], e[7], e[8], e[9], e[10], e[11], e[12], e[13], e[14]],
    )
}

pub fn ngtdm(roi: &Roi, bin_width: f64) -> Feats {
    let lv = roi.levels(bin_width);
    let mut n: BTreeMap<usize, f64> = BTreeMap::new();
    let mut s: BTreeMap<usize, f64> = BTreeMap::new();
    for (p, l) in &lv {
        let nb: Vec<f64> = lv.iter().filter(|(q, _)| chebyshev1(*p, *q)).map(|t| t.1 as f64).collect();
        if nb.is_empty() {
            continue;
        }
        let avg = nb.iter().sum::<f64>() / nb.len() as f64;
        *n.entry(*l).or_default() += 1.0;
        *s.entry(*l).or_default() += (*l as f64 - avg).abs();
    }
    let names = ["Coarseness", "Contrast", "Busyness", "Complexity", "Strength"];
    let nvp: f64 = n.values().sum();
    if nvp == 0.0 {
        return named(&names, vec![1e6, 0.0, 0.0, 0.0, 0.0]);
    }
    let p: BTreeMap<usize, f64> = n.iter().map(|(k, v)| (*k, v / nvp)).collect();
    let ngp = p.len() as f64;
    let ssum: f64 = s.values().sum();
    let ps: f64 = p.iter().map(|(k, v)| v * s[k]).sum();
    let mut contrast = 0.0;
    let mut busy = 0.0;
    let mut complexity = 0.0;
    let mut strength = 0.0;
    for (&i, &pi) in &p {
        for (&j, &pj) in &p {
            let (fi, fj) = (i as f64, j as f64);
            contrast += pi * pj * (fi - fj).powi(2);
            busy += (fi * pi - fj * pj).abs();
            complexity += (fi - fj).abs() * (pi * s[&i] + pj * s[&j]) / (pi + pj);
            strength += (pi + pj) * (fi - fj).powi(2);
        }
    }
    named(
        &names,
        vec![
            if ps == 0.0 { 1e6 } else { 1.0 / ps },
            if ngp > 1.0 { contrast / (ngp * (ngp - 1.0)) * ssum / nvp } else { 0.0 },
            if busy == 0.0 { 0.0 } else { ps / busy },
            complexity / nvp,
            if ssum == 0.0 { 0.0 } else { strength / ssum },
        ],
    )
}

/// Eigenvalues of a symmetric 3×3 matrix, descending, by the trigonometric
/// solution of the characteristic cubic.
pub fn sym3_eigenvalues(a: [[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    if p1 == 0.0 {
        let mut e = [a[0][0], a[1][1], a[2][2]];
        e.sort_by(|x, y| y.partial_cmp(x).unwrap());
        return e;
    }
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    [e1, 3.0 * q - e1 - e3, e3]
}

pub fn shape(points: &[[i64; 3]], spacing: [f64; 3]) -> Feats {
    let set: HashSet<[i64; 3]> = points.iter().copied().collect();
    let vol = points.len() as f64 * spacing.iter().product::<f64>();
    let mut area = 0.0;
    for p in points {
        for axis in 0..3 {
            for sgn in [-1, 1] {
                let mut q = *p;
                q[axis] += sgn;
                if !set.contains(&q) {
                    area += spacing.iter().enumerate().filter(|(k, _)| *k != axis).map(|(_, s)| s).product::<f64>();
                }
            }
        }
    }
    let phys = |p: &[i64; 3]| [p[0] as f64 * spacing[0], p[1] as f64 * spacing[1], p[2] as f64 * spacing[2]];
    let mut d3 = 0.0f64;
    let mut dd = [0.0f64; 3];
    for a in points {
        for b in points {
            let (pa, pb) = (phys(a), phys(b));
            let dist = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2) + (pa[2] - pb[2]).powi(2)).sqrt();
            d3 = d3.max(dist);
            // same z: slice, same y: column, same x: row
            for (k, axis) in [2usize, 1, 0].iter().enumerate() {
                if a[*axis] == b[*axis] {
                    dd[k] = dd[k].max(dist);
                }
            }
        }
    }
    let n = points.len() as f64;
    let c: Vec<[f64; 3]> = points.iter().map(phys).collect();
    let mu = [0, 1, 2].map(|k| c.iter().map(|p| p[k]).sum::<f64>() / n);
    let mut cov = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            cov[i][j] = c.iter().map(|p| (p[i] - mu[i]) * (p[j] - mu[j])).sum::<f64>() / n;
        }
    }
    let e = sym3_eigenvalues(cov).map(|x| x.max(0.0));
    let pi = std::f64::consts::PI;
    named(
        &[
            "VoxelVolume", "SurfaceArea", "SurfaceVolumeRatio", "Sphericity", "Compactness2",
            "SphericalDisproportion", "Maximum3DDiameter", "Maximum2DDiameterSlice", "Maximum2DDiameterColumn",
            "Maximum2DDiameterRow", "MajorAxisLength", "MinorAxisLength", "LeastAxisLength", "Elongation", "Flatness",
        ],
        vec![
            vol,
            area,
            area / vol,
            pi.cbrt() * (6.0 * vol).powf(2.0 / 3.0) / area,
            36.0 * pi * vol * vol / area.powi(3),
            area / (pi.cbrt() * (6.0 * vol).powf(2.0 / 3.0)),
            d3,
            dd[0],
            dd[1],
            dd[2],
            4.0 * e[0].sqrt(),
            4.0 * e[1].sqrt(),
            4.0 * e[2].sqrt(),
            if e[0] == 0.0 { 1.0 } else { (e[1] / e[0]).sqrt() },
            if e[0] == 0.0 { 1.0 } else { (e[2] / e[0]).sqrt() },
        ],
    )
}

/// 3D MS-SSIM with an explicit (non-separable) window sum at every position.
pub fn ms_ssim(a: &[f64], b: &[f64], dims: [usize; 3], range: f64) -> f64 {
    let weights = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];
    let (c1, c2) = ((0.01 * range).powi(2), (0.03 * range).powi(2));
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    let mut d = dims;
    let mut result = 1.0;
    for (level, w) in weights.iter().enumerate() {
        let m = *d.iter().min().unwrap();
        let win = 11.min(if m % 2 == 1 { m } else { m - 1 });
        let r = (win / 2) as i64;
        let g1: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / 4.5).exp()).collect();
        let gs: f64 = g1.iter().sum();
        let mut g3 = Vec::new();
        for k in &g1 {
            for j in &g1 {
                for i in &g1 {
                    g3.push(i * j * k / (gs * gs * gs));
                }
            }
        }
        let out = [d[0] + 1 - win, d[1] + 1 - win, d[2] + 1 - win];
        let (mut ssim, mut cs) = (0.0, 0.0);
        for oz in 0..out[2] {
            for oy in 0..out[1] {
                for ox in 0..out[0] {
                    let (mut mx, mut my, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
                    let mut t = 0;
                    for k in 0..win {
                        for j in 0..win {
                            let base = ox + d[0] * ((oy + j) + d[1] * (oz + k));
                            for i in 0..win {
                                let (u, v, g) = (x[base + i], y[base + i], g3[t]);
                                mx += g * u;
                                my += g * v;
                                sxx += g * u * u;
                                syy += g * v * v;
                                sxy += g * u * v;
                                t += 1;
                            }
                        }
                    }
                    let cs_here = (2.0 * (sxy - mx * my) + c2) / ((sxx - mx * mx) + (syy - my * my) + c2);
                    cs += cs_here;
                    ssim += cs_here * (2.0 * mx * my + c1) / (mx * mx + my * my + c1);
                }
            }
        }
        let count = (out[0] * out[1] * out[2]) as f64;
        let term = if level == weights.len() - 1 { ssim / count } else { cs / count };
        result *= term.max(0.0).powf(*w);
        let nd = [d[0] / 2, d[1] / 2, d[2] / 2];
        let pool = |src: &[f64]| {
            let mut o = vec![0.0; nd[0] * nd[1] * nd[2]];
            for z in 0..nd[2] * 2 {
                for yy in 0..nd[1] * 2 {
                    for xx in 0..nd[0] * 2 {
                        o[xx / 2 + nd[0] * (yy / 2 + nd[1] * (z / 2))] += src[xx + d[0] * (yy + d[1] * z)] / 8.0;
                    }
                }
            }
            o
        };
        x = pool(&x);
        y = pool(&y);
        d = nd;
    }
    result
}

/// Fleiss' κ from the textbook formula on a cases × categories table.
pub fn fleiss(table: &[Vec<usize>]) -> f64 {
    let n_cases = table.len() as f64;
    let n: f64 = table[0].iter().sum::<usize>() as f64;
    let k = table[0].len();
    let p_i: Vec<f64> = table
        .iter()
        .map(|row| (row.iter().map(|&c| (c * c) as f64).sum::<f64>() - n) / (n * (n - 1.0)))
        .collect();
    let p_bar = p_i.iter().sum::<f64>() / n_cases;
    let p_j: Vec<f64> = (0..k).map(|j| table.iter().map(|r| r[j] as f64).sum::<f64>() / (n_cases * n)).collect();
    let p_e: f64 = p_j.iter().map(|p| p * p).sum();
    (p_bar - p_e) / (1.0 - p_e)
}

/// Two-sided exact Mann–Whitney p-value by visiting every labelling of the
/// pooled sample into groups of sizes n and m.
pub fn mann_whitney_enumerated(a: &[f64], b: &[f64]) -> (f64, f64) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let total = pooled.len();
    let u_of = |members: &[usize]| -> f64 {
        // U counts pairs (x in group, y outside) with x > y, ties as 1/2.
        let mut u = 0.0;
        for &i in members {
            for j in 0..total {
                if members.contains(&j) {
                    continue;
                }
                if pooled[i] > pooled[j] {
                    u += 1.0;
                } else if pooled[i] == pooled[j] {
                    u += 0.5;
                }
            }
        }
        u
    };
    let n = a.len();
    let centre = (n * b.len()) as f64 / 2.0;
    let observed = u_of(&(0..n).collect::<Vec<_>>());
    let mut hits = 0usize;
    let mut count = 0usize;
    for mask in 0u32..(1 << total) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let members: Vec<usize> = (0..total).filter(|i| mask >> i & 1 == 1).collect();
        count += 1;
        if (u_of(&members) - centre).abs() >= (observed - centre).abs() - 1e-12 {
            hits += 1;
        }
    }
    (observed, hits as f64 / count as f64)
}

/// Direct Haar analysis of a 2×2×2 block: band coefficient = Σ sign·v / √8.
pub fn haar_block(v: &[f64; 8]) -> [f64; 8] {
    let mut out = [0.0; 8];
    for (band, o) in out.iter_mut().enumerate() {
        let (hx, hy, hz) = (band >> 2 & 1, band >> 1 & 1, band & 1);
        for (idx, val) in v.iter().enumerate() {
            let (x, y, z) = (idx & 1, idx >> 1 & 1, idx >> 2 & 1);
            let sign = if (hx * x + hy * y + hz * z) % 2 == 1 { -1.0 } else { 1.0 };
            *o += sign * val / 8f64.sqrt();
        }
    }
    out
}
