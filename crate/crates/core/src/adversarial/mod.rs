//! Loss algebra of the conditional GAN and the wavelet diffusion models, plus
//! the adaptive augmentation probability controller.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{LabelMask, Volume};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GanLambdas {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub l5: f64,
}

impl GanLambdas {
    pub const CT: GanLambdas = GanLambdas { l1: 1.0, l2: 1000.0, l3: 100.0, l4: 1.0, l5: 10.0 };
    pub const MRI: GanLambdas = GanLambdas { l1: 1.0, l2: 100.0, l3: 100.0, l4: 1.0, l5: 10.0 };
    pub const PRESETS: [&'static str; 2] = ["ct", "mri"];

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "ct" => Ok(Self::CT),
            "mri" => Ok(Self::MRI),
            _ => Err(Error::UnknownName {
                kind: "lambda preset",
                name: name.to_string(),
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.l1, self.l2, self.l3, self.l4, self.l5];
        if all.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(Error::InvalidArgument(format!("lambdas must be non-negative, got {all:?}")));
        }
        Ok(())
    }
}

/// Drift penalty weight on the real scores.
pub const DRIFT: f64 = 0.001;

fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().sum::<f64>() / x.len() as f64
    }
}

fn check_batch(x: &[Volume], g: &[Volume]) -> Result<()> {
    if x.len() != g.len() {
        return Err(Error::ShapeMismatch(format!("batch sizes {} and {}", x.len(), g.len())));
    }
    for (a, b) in x.iter().zip(g) {
        if a.dims() != b.dims() {
            return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", a.dims(), b.dims())));
        }
    }
    Ok(())
}

/// The three generator terms before weighting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorTerms {
    pub adversarial: f64,
    pub mae: f64,
    pub tumor_mse: f64,
}

impl GeneratorTerms {
    pub fn total(&self, l: &GanLambdas) -> f64 {
        -l.l1 * self.adversarial + l.l2 * self.mae + l.l3 * self.tumor_mse
    }
}

/// `adversarial = mean(d_fake)`; `mae` is the per-voxel mean over the batch;
/// `tumor_mse` averages over tumor voxels only and is 0 with no tumor voxel.
pub fn generator_terms(d_fake: &[f64], x: &[Volume], g_out: &[Volume], tumor: &[LabelMask]) -> Result<GeneratorTerms> {
    check_batch(x, g_out)?;
    if tumor.len() != x.len() {
        return Err(Error::ShapeMismatch(format!("{} tumor masks for {} samples", tumor.len(), x.len())));
    }
    let mut abs_sum = 0.0;
    let mut n = 0usize;
    let mut sq_sum = 0.0;
    let mut n_tumor = 0usize;
    for ((a, b), t) in x.iter().zip(g_out).zip(tumor) {
        if t.dims() != a.dims() {
            return Err(Error::ShapeMismatch(format!("tumor {:?} vs volume {:?}", t.dims(), a.dims())));
        }
        if !t.is_binary() {
            return Err(Error::InvalidArgument("tumor mask must be binary".into()));
        }
        for ((u, v), &l) in a.values().iter().zip(b.values()).zip(t.labels()) {
            abs_sum += (u - v).abs();
            if l == 1 {
                sq_sum += (u - v).powi(2);
                n_tumor += 1;
            }
        }
        n += a.len();
    }
    Ok(GeneratorTerms {
        adversarial: mean(d_fake),
        mae: if n == 0 { 0.0 } else { abs_sum / n as f64 },
        tumor_mse: if n_tumor == 0 { 0.0 } else { sq_sum / n_tumor as f64 },
    })
}

/// `−λ1·mean(d_fake) + λ2·MAE(x, g_out) + λ3·tMSE`.
pub fn generator_loss(
    d_fake: &[f64],
    x: &[Volume],
    g_out: &[Volume],
    tumor: &[LabelMask],
    l: &GanLambdas,
) -> Result<f64> {
    Ok(generator_terms(d_fake, x, g_out, tumor)?.total(l))
}

/// `−λ4·(mean(d_real) − mean(d_fake)) + λ5·mean((‖∇‖ − 1)²) + 0.001·mean(d_real²)`.
pub fn discriminator_loss(d_real: &[f64], d_fake: &[f64], grad_norms: &[f64], l: &GanLambdas) -> Result<f64> {
    if let Some(g) = grad_norms.iter().find(|g| !(**g >= 0.0)) {
        return Err(Error::InvalidArgument(format!("gradient norms must be >= 0, got {g}")));
    }
    let penalty = mean(&grad_norms.iter().map(|g| (g - 1.0).powi(2)).collect::<Vec<_>>());
    let drift = mean(&d_real.iter().map(|d| d * d).collect::<Vec<_>>());
    Ok(-l.l4 * (mean(d_real) - mean(d_fake)) + l.l5 * penalty + DRIFT * drift)
}

/// `eps·x + (1 − eps)·g` per sample.
pub fn interpolate_samples(x: &[Volume], g: &[Volume], eps: &[f64]) -> Result<Vec<Volume>> {
    check_batch(x, g)?;
    if eps.len() != x.len() {
        return Err(Error::ShapeMismatch(format!("{} eps values for {} samples", eps.len(), x.len())));
    }
    x.iter()
        .zip(g)
        .zip(eps)
        .map(|((a, b), &e)| {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::OutOfRange { value: e, lo: 0.0, hi: 1.0 });
            }
            let data = a.values().iter().zip(b.values()).map(|(u, v)| e * u + (1.0 - e) * v).collect();
            Volume::new(*a.geometry(), data, crate::volume::IntensityKind::Arbitrary)
        })
        .collect()
}

/// Weight of the tumor-region term in the inpainting loss.
pub const INPAINT_LAMBDA: f64 = 10.0;

/// `(L_wdm, L_inpaint)`: MSE over all voxels, and that plus `λ1 ×` the MSE
/// over voxels with label 1 in `s` (0 when `s` is empty).
pub fn diffusion_losses(x0: &Volume, x0_hat: &Volume, s: &LabelMask, lambda1: f64) -> Result<(f64, f64)> {
    x0.geometry().ensure_matches(x0_hat.geometry())?;
    x0.geometry().ensure_matches(&s.geometry())?;
    let mut all = 0.0;
    let mut masked = 0.0;
    let mut n_masked = 0usize;
    for ((a, b), &l) in x0.values().iter().zip(x0_hat.values()).zip(s.labels()) {
        let e = (a - b).powi(2);
        all += e;
        if l == 1 {
            masked += e;
            n_masked += 1;
        }
    }
    let wdm = all / x0.len() as f64;
    let region = if n_masked == 0 { 0.0 } else { masked / n_masked as f64 };
    Ok((wdm, wdm + lambda1 * region))
}

/// Probability of applying the augmentation transforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentationState {
    pub p: f64,
    pub step: f64,
}

impl Default for AugmentationState {
    fn default() -> Self {
        Self { p: 0.0, step: 0.05 }
    }
}

/// Raises `p` by one step when the training sign sum is positive and the
/// validation sign sum negative, lowers it otherwise; clamped to `[0, 1]`.
pub fn ada_update(state: AugmentationState, train_sign_sum: f64, val_sign_sum: f64) -> AugmentationState {
    let delta = if train_sign_sum > 0.0 && val_sign_sum < 0.0 {
        state.step
    } else {
        -state.step
    };
    AugmentationState {
        p: (state.p + delta).clamp(0.0, 1.0),
        ..state
    }
}
