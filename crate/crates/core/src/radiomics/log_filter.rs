//! Scale-normalized Laplacian of Gaussian.

use crate::error::{Error, Result};
use crate::volume::{convolve_separable, gaussian_kernel, IntensityKind, Spacing, Volume};

/// Per-axis `(smoothing, second-derivative)` kernels for `sigma_mm`.
///
/// The smoothing kernel is the unit-sum sampled Gaussian with σ in voxels.
/// The derivative kernel is that Gaussian times `k²/σ⁴ − 1/σ²`, shifted to
/// zero sum and expressed per mm².
pub fn log_kernels(sigma_mm: f64, spacing: Spacing) -> [(Vec<f64>, Vec<f64>); 3] {
    spacing.map(|sp| {
        let s = sigma_mm / sp;
        let g = gaussian_kernel(s);
        let r = (g.len() / 2) as isize;
        let mut g2: Vec<f64> = g
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let k = (i as isize - r) as f64;
                w * (k * k / s.powi(4) - 1.0 / (s * s))
            })
            .collect();
        let mean = g2.iter().sum::<f64>() / g2.len() as f64;
        g2.iter_mut().for_each(|v| *v = (*v - mean) / (sp * sp));
        (g, g2)
    })
}

/// `σ² ∇²(G_σ * v)` with σ in mm, truncated at 4σ, reflect boundary.
pub fn log_filter(v: &Volume, sigma_mm: f64) -> Result<Volume> {
    if !(sigma_mm > 0.0 && sigma_mm.is_finite()) {
        return Err(Error::InvalidArgument(format!("LoG sigma must be positive, got {sigma_mm}")));
    }
    let [(gx, g2x), (gy, g2y), (gz, g2z)] = log_kernels(sigma_mm, v.spacing());
    let dims = v.dims();
    let d = v.values();
    let xx = convolve_separable(d, dims, [Some(&g2x), Some(&gy), Some(&gz)]);
    let yy = convolve_separable(d, dims, [Some(&gx), Some(&g2y), Some(&gz)]);
    let zz = convolve_separable(d, dims, [Some(&gx), Some(&gy), Some(&g2z)]);
    let s2 = sigma_mm * sigma_mm;
    let out = xx
        .iter()
        .zip(&yy)
        .zip(&zz)
        .map(|((a, b), c)| s2 * (a + b + c))
        .collect();
    Ok(Volume::from_parts_unchecked(*v.geometry(), out, IntensityKind::Arbitrary))
}
