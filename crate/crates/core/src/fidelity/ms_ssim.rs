//! Multi-scale structural similarity for volumes.
//!
//! At each scale the local statistics use a separable Gaussian window over the
//! valid region only. The window is `min(window, d)` taps where `d` is the
//! largest odd number not exceeding the smallest dimension at that scale, so
//! coarse scales of small volumes still get a centred window. Between scales
//! the volumes are 2×2×2 average pooled (trailing odd planes dropped).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{Dims, IntensityKind, Volume};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MsSsimConfig {
    pub weights: Vec<f64>,
    pub sigma: f64,
    pub window: usize,
    pub k1: f64,
    pub k2: f64,
    /// Overrides the dynamic range derived from the intensity kind.
    pub data_range: Option<f64>,
}

impl Default for MsSsimConfig {
    fn default() -> Self {
        Self {
            weights: vec![0.0448, 0.2856, 0.3001, 0.2363, 0.1333],
            sigma: 1.5,
            window: 11,
            k1: 0.01,
            k2: 0.03,
            data_range: None,
        }
    }
}

pub fn ms_ssim(a: &Volume, b: &Volume) -> Result<f64> {
    ms_ssim_with(a, b, &MsSsimConfig::default())
}

/// Normalized volumes span `[-1, 1]`, giving range 2; otherwise the range is
/// the joint max − min of both inputs (1 if both are one constant).
fn dynamic_range(a: &Volume, b: &Volume, cfg: &MsSsimConfig) -> f64 {
    if let Some(l) = cfg.data_range {
        return l;
    }
    if a.kind() == IntensityKind::Normalized && b.kind() == IntensityKind::Normalized {
        return 2.0;
    }
    let (lo_a, hi_a) = a.min_max();
    let (lo_b, hi_b) = b.min_max();
    let l = hi_a.max(hi_b) - lo_a.min(lo_b);
    if l > 0.0 {
        l
    } else {
        1.0
    }
}

pub fn ms_ssim_with(a: &Volume, b: &Volume, cfg: &MsSsimConfig) -> Result<f64> {
    a.geometry().ensure_matches(b.geometry())?;
    if cfg.weights.is_empty() || cfg.window == 0 || cfg.window & 1 == 0 || !(cfg.sigma > 0.0) {
        return Err(Error::InvalidArgument(
            "MS-SSIM needs at least one weight, an odd window and sigma > 0".into(),
        ));
    }
    let scales = cfg.weights.len();
    let mut dims = a.dims();
    let coarsest = dims.iter().map(|d| d >> (scales - 1)).min().unwrap();
    if coarsest < 3 {
        return Err(Error::VolumeTooSmall(format!(
            "{:?} leaves {coarsest} voxels at scale {scales}; at least 3 are needed",
            a.dims()
        )));
    }
    let l = dynamic_range(a, b, cfg);
    let c1 = (cfg.k1 * l).powi(2);
    let c2 = (cfg.k2 * l).powi(2);
    let mut x = a.values().to_vec();
    let mut y = b.values().to_vec();
    let mut out = 1.0;
    for (j, &w) in cfg.weights.iter().enumerate() {
        let (ssim, cs) = scale_stats(&x, &y, dims, cfg, c1, c2);
        let term = if j + 1 == scales { ssim } else { cs };
        out *= term.max(0.0).powf(w);
        if j + 1 < scales {
            let (px, d) = avg_pool(&x, dims);
            let (py, _) = avg_pool(&y, dims);
            x = px;
            y = py;
            dims = d;
        }
    }
    Ok(out)
}

pub(crate) fn window_taps(sigma: f64, max_window: usize, dims: Dims) -> Vec<f64> {
    let min_dim = *dims.iter().min().unwrap();
    let largest_odd = if min_dim % 2 == 1 { min_dim } else { min_dim - 1 };
    let w = max_window.min(largest_odd);
    let r = (w / 2) as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Correlates along each axis without padding; output is `n - w + 1` per axis.
fn valid_filter(data: &[f64], dims: Dims, k: &[f64]) -> (Vec<f64>, Dims) {
    let w = k.len();
    let mut cur = data.to_vec();
    let mut d = dims;
    for axis in 0..3 {
        let nd = {
            let mut t = d;
            t[axis] = d[axis] + 1 - w;
            t
        };
        let stride = match axis {
            0 => 1,
            1 => d[0],
            _ => d[0] * d[1],
        };
        let mut out = vec![0.0; nd[0] * nd[1] * nd[2]];
        for z in 0..nd[2] {
            for y in 0..nd[1] {
                for x in 0..nd[0] {
                    let base = x + d[0] * (y + d[1] * z);
                    let mut acc = 0.0;
                    for (t, kv) in k.iter().enumerate() {
                        acc += kv * cur[base + t * stride];
                    }
                    out[x + nd[0] * (y + nd[1] * z)] = acc;
                }
            }
        }
        cur = out;
        d = nd;
    }
    (cur, d)
}

fn scale_stats(x: &[f64], y: &[f64], dims: Dims, cfg: &MsSsimConfig, c1: f64, c2: f64) -> (f64, f64) {
    let k = window_taps(cfg.sigma, cfg.window, dims);
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    let (mx, _) = valid_filter(x, dims, &k);
    let (my, _) = valid_filter(y, dims, &k);
    let (sxx, _) = valid_filter(&xx, dims, &k);
    let (syy, _) = valid_filter(&yy, dims, &k);
    let (sxy, _) = valid_filter(&xy, dims, &k);
    let n = mx.len() as f64;
    let mut ssim = 0.0;
    let mut cs = 0.0;
    for i in 0..mx.len() {
        let (ux, uy) = (mx[i], my[i]);
        let vx = sxx[i] - ux * ux;
        let vy = syy[i] - uy * uy;
        let cov = sxy[i] - ux * uy;
        let c = (2.0 * cov + c2) / (vx + vy + c2);
        cs += c;
        ssim += (2.0 * ux * uy + c1) / (ux * ux + uy * uy + c1) * c;
    }
    (ssim / n, cs / n)
}

pub(crate) fn avg_pool(data: &[f64], dims: Dims) -> (Vec<f64>, Dims) {
    let nd = dims.map(|d| d / 2);
    let mut out = Vec::with_capacity(nd[0] * nd[1] * nd[2]);
    for z in 0..nd[2] {
        for y in 0..nd[1] {
            for x in 0..nd[0] {
                let mut acc = 0.0;
                for (dx, dy, dz) in (0..8).map(|o| (o & 1, o >> 1 & 1, o >> 2)) {
                    acc += data[(2 * x + dx) + dims[0] * ((2 * y + dy) + dims[1] * (2 * z + dz))];
                }
                out.push(acc / 8.0);
            }
        }
    }
    (out, nd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::Geometry;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(n: usize, seed: u64) -> Volume {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        Volume::new(Geometry::isotropic([n, n, n]), data, IntensityKind::Normalized).unwrap()
    }

    #[test]
    fn identity_is_one() {
        let a = noise(48, 1);
        assert!((ms_ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_noise_is_strictly_between() {
        let s = ms_ssim(&noise(48, 2), &noise(48, 3)).unwrap();
        assert!(s > 0.0 && s < 1.0, "{s}");
    }

    #[test]
    fn too_small() {
        assert!(matches!(ms_ssim(&noise(40, 1), &noise(40, 2)), Err(Error::VolumeTooSmall(_))));
    }

    #[test]
    fn window_shrinks_with_dims() {
        assert_eq!(window_taps(1.5, 11, [64, 64, 64]).len(), 11);
        assert_eq!(window_taps(1.5, 11, [4, 8, 8]).len(), 3);
        assert_eq!(window_taps(1.5, 11, [9, 9, 9]).len(), 9);
    }

    #[test]
    fn pooling_averages_blocks() {
        let data: Vec<f64> = (0..8).map(f64::from).collect();
        let (p, d) = avg_pool(&data, [2, 2, 2]);
        assert_eq!(d, [1, 1, 1]);
        assert_eq!(p, vec![3.5]);
    }
}
