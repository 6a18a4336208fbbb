use crate::error::Result;
use crate::volume::{IntensityKind, Volume};

use super::Condition;

/// Noise level of one denoiser call. `sigma = √((1 − ᾱ)/ᾱ)`; `timestep` is
/// the (possibly fractional) schedule index with that σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseLevel {
    pub sigma: f64,
    pub alpha_bar: f64,
    pub timestep: f64,
}

impl NoiseLevel {
    pub fn from_sigma(sigma: f64, timestep: f64) -> Self {
        Self {
            sigma,
            alpha_bar: 1.0 / (1.0 + sigma * sigma),
            timestep,
        }
    }
}

/// A model predicting the clean sample x̂₀ from a variance-preserving noisy
/// sample `x_t = √ᾱ x₀ + √(1 − ᾱ) ε`. An ε-predictor maps through
/// `x̂₀ = (x_t − √(1 − ᾱ) ε̂)/√ᾱ`.
pub trait Denoiser: Sync {
    fn denoise(&self, x_t: &Volume, level: NoiseLevel, cond: Option<&Condition>) -> Result<Volume>;
}

/// Always predicts the same clean volume.
#[derive(Debug, Clone)]
pub struct PointMass {
    pub x0: Volume,
}

impl Denoiser for PointMass {
    fn denoise(&self, x_t: &Volume, _: NoiseLevel, _: Option<&Condition>) -> Result<Volume> {
        x_t.geometry().ensure_matches(self.x0.geometry())?;
        Ok(self.x0.clone())
    }
}

/// Exact posterior mean for i.i.d. voxels drawn from `N(mean, std²)`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianDenoiser {
    pub mean: f64,
    pub std: f64,
}

impl Denoiser for GaussianDenoiser {
    fn denoise(&self, x_t: &Volume, level: NoiseLevel, _: Option<&Condition>) -> Result<Volume> {
        let a = level.alpha_bar.sqrt();
        let s2 = self.std * self.std;
        let gain = a * s2 / (a * a * s2 + 1.0 - level.alpha_bar);
        let mu = self.mean;
        x_t.map(IntensityKind::Arbitrary, |x| mu + gain * (x - a * mu))
    }
}
