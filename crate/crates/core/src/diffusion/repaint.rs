//! Known-region replacement during reverse diffusion.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::sampler::{ancestral_step, SampleOutput, TrajectoryRecord};
use super::{BlurMask, Condition, Denoiser, NoiseLevel, NoiseSchedule};
use crate::error::{Error, Result};
use crate::volume::{IntensityKind, Volume};

/// Stream used by the ancestral sampler; replacement noise for step `t` uses
/// stream `t`.
const SAMPLER_STREAM: u64 = 1 << 40;

/// Generator for the replacement noise of step `t`.
pub fn step_rng(seed: u64, t: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t as u64);
    rng
}

/// `√ᾱ x₀ + √(1 − ᾱ) ε` with ε drawn from `rng`.
pub fn forward_noise(x0: &Volume, alpha_bar: f64, rng: &mut ChaCha8Rng) -> Volume {
    let (a, b) = (alpha_bar.sqrt(), (1.0 - alpha_bar).sqrt());
    let data = x0
        .values()
        .iter()
        .map(|x| {
            let e: f64 = StandardNormal.sample(rng);
            a * x + b * e
        })
        .collect();
    Volume::from_parts_unchecked(*x0.geometry(), data, IntensityKind::Arbitrary)
}

/// `m·x_t + (1 − m)·forward_noise(original, t)`, where m = 1 marks voxels the
/// model generates and m = 0 voxels kept from `original`.
pub fn repaint_replace(
    x_t: &Volume,
    original: &Volume,
    mask: &BlurMask,
    t: usize,
    schedule: &NoiseSchedule,
    seed: u64,
) -> Result<Volume> {
    x_t.geometry().ensure_matches(original.geometry())?;
    x_t.geometry().ensure_matches(mask.values.geometry())?;
    let ab = *schedule
        .alpha_bar
        .get(t)
        .ok_or_else(|| Error::InvalidArgument(format!("timestep {t} beyond schedule length {}", schedule.len())))?;
    let noised = forward_noise(original, ab, &mut step_rng(seed, t));
    let data = x_t
        .values()
        .iter()
        .zip(noised.values())
        .zip(mask.values.values())
        .map(|((x, n), m)| m * x + (1.0 - m) * n)
        .collect();
    Ok(Volume::from_parts_unchecked(*x_t.geometry(), data, IntensityKind::Arbitrary))
}

/// Ancestral inpainting: before each denoiser call the known region is
/// replaced by the forward-noised original. `on_step(t, x_t)` sees every
/// replaced state. The result is finally blended with the clean original.
pub fn repaint_sample(
    denoiser: &dyn Denoiser,
    schedule: &NoiseSchedule,
    original: &Volume,
    mask: &BlurMask,
    cond: Option<&Condition>,
    seed: u64,
    mut on_step: impl FnMut(usize, &Volume),
) -> Result<SampleOutput> {
    let geometry = *original.geometry();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SAMPLER_STREAM);
    let init: Vec<f64> = (0..geometry.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut x = Volume::from_parts_unchecked(geometry, init, IntensityKind::Arbitrary);
    let sigmas = schedule.sigmas();
    let mut trajectory = Vec::with_capacity(schedule.len());
    for t in (0..schedule.len()).rev() {
        x = repaint_replace(&x, original, mask, t, schedule, seed)?;
        on_step(t, &x);
        let level = NoiseLevel {
            sigma: sigmas[t],
            alpha_bar: schedule.alpha_bar[t],
            timestep: t as f64,
        };
        let x0 = denoiser.denoise(&x, level, cond)?;
        x0.geometry().ensure_matches(&geometry)?;
        let mut data = x.into_values();
        ancestral_step(schedule, t, &mut data, x0.values(), &mut rng);
        trajectory.push(TrajectoryRecord {
            step: schedule.len() - 1 - t,
            sigma: sigmas[t],
            timestep: t as f64,
            ..summary(&data)
        });
        x = Volume::from_parts_unchecked(geometry, data, IntensityKind::Arbitrary);
    }
    let data = x
        .values()
        .iter()
        .zip(original.values())
        .zip(mask.values.values())
        .map(|((x, o), m)| m * x + (1.0 - m) * o)
        .collect();
    Ok(SampleOutput {
        volume: Volume::from_parts_unchecked(geometry, data, IntensityKind::Arbitrary),
        trajectory,
    })
}

fn summary(x: &[f64]) -> TrajectoryRecord {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    TrajectoryRecord {
        step: 0,
        sigma: 0.0,
        timestep: 0.0,
        mean,
        std: var.sqrt(),
        min: x.iter().copied().fold(f64::INFINITY, f64::min),
        max: x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}
