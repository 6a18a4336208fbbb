//! Reverse-diffusion samplers.
//!
//! DPM++ 2M runs in the variance-exploding parameterization `x = x_vp/√ᾱ`,
//! stepping in `t = −ln σ`. The denoiser is always called on the
//! variance-preserving sample.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{karras_sigmas, Condition, Denoiser, NoiseLevel, NoiseSchedule, KARRAS_RHO};
use crate::error::{Error, Result};
use crate::volume::{Geometry, IntensityKind, Volume};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplerKind {
    /// Ancestral DDPM over every schedule step.
    #[serde(rename = "linear")]
    Linear,
    #[serde(rename = "dpmpp-2m")]
    Dpmpp2m,
    #[serde(rename = "dpmpp-2m-karras")]
    Dpmpp2mKarras,
    #[serde(rename = "dpmpp-2m-sde")]
    Dpmpp2mSde,
    #[serde(rename = "dpmpp-2m-sde-karras")]
    Dpmpp2mSdeKarras,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 5] = [
        SamplerKind::Linear,
        SamplerKind::Dpmpp2m,
        SamplerKind::Dpmpp2mKarras,
        SamplerKind::Dpmpp2mSde,
        SamplerKind::Dpmpp2mSdeKarras,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SamplerKind::Linear => "linear",
            SamplerKind::Dpmpp2m => "dpmpp-2m",
            SamplerKind::Dpmpp2mKarras => "dpmpp-2m-karras",
            SamplerKind::Dpmpp2mSde => "dpmpp-2m-sde",
            SamplerKind::Dpmpp2mSdeKarras => "dpmpp-2m-sde-karras",
        }
    }

    fn variant(self) -> Option<(Variant, bool)> {
        match self {
            SamplerKind::Linear => None,
            SamplerKind::Dpmpp2m => Some((Variant::Plain, false)),
            SamplerKind::Dpmpp2mKarras => Some((Variant::Plain, true)),
            SamplerKind::Dpmpp2mSde => Some((Variant::Sde, false)),
            SamplerKind::Dpmpp2mSdeKarras => Some((Variant::Sde, true)),
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SamplerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "sampler",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Plain,
    /// Stochastic midpoint variant with η = 1.
    Sde,
}

/// One line of a trajectory log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub step: usize,
    pub sigma: f64,
    pub timestep: f64,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl TrajectoryRecord {
    fn of(step: usize, sigma: f64, timestep: f64, x: &[f64]) -> Self {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let (min, max) = x
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        Self {
            step,
            sigma,
            timestep,
            mean,
            std: var.sqrt(),
            min,
            max,
        }
    }
}

pub fn write_trajectory_jsonl<W: Write>(records: &[TrajectoryRecord], mut w: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SampleOutput {
    pub volume: Volume,
    pub trajectory: Vec<TrajectoryRecord>,
}

/// Running state of a DPM++ 2M trajectory. `x` is variance-exploding scaled.
#[derive(Debug, Clone)]
pub struct SamplerState {
    pub x: Vec<f64>,
    pub step: usize,
    old_denoised: Option<Vec<f64>>,
    h_last: Option<f64>,
}

impl SamplerState {
    /// Starts from `x_vp ~ N(0, I)` rescaled to the first σ.
    pub fn from_noise(noise: Vec<f64>, sigma_max: f64) -> Self {
        let s = (1.0 + sigma_max * sigma_max).sqrt();
        Self {
            x: noise.into_iter().map(|e| e * s).collect(),
            step: 0,
            old_denoised: None,
            h_last: None,
        }
    }
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn call_denoiser(
    denoiser: &dyn Denoiser,
    geometry: Geometry,
    x_ve: &[f64],
    sigma: f64,
    schedule: &NoiseSchedule,
    cond: Option<&Condition>,
) -> Result<Vec<f64>> {
    let level = NoiseLevel::from_sigma(sigma, schedule.sigma_to_t(sigma));
    let scale = level.alpha_bar.sqrt();
    let x_vp = Volume::from_parts_unchecked(
        geometry,
        x_ve.iter().map(|v| v * scale).collect(),
        IntensityKind::Arbitrary,
    );
    let out = denoiser.denoise(&x_vp, level, cond)?;
    out.geometry().ensure_matches(&geometry)?;
    Ok(out.into_values())
}

/// Advances `state` from `sigmas[step]` to `sigmas[step + 1]`. The first step
/// and the final step to σ = 0 are first order.
#[allow(clippy::too_many_arguments)]
pub fn dpmpp_2m_step(
    state: &mut SamplerState,
    denoiser: &dyn Denoiser,
    geometry: Geometry,
    sigmas: &[f64],
    schedule: &NoiseSchedule,
    variant: Variant,
    cond: Option<&Condition>,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let i = state.step;
    let (s, s_next) = (sigmas[i], sigmas[i + 1]);
    let denoised = call_denoiser(denoiser, geometry, &state.x, s, schedule, cond)?;
    if s_next == 0.0 {
        state.x = denoised.clone();
        state.h_last = None;
    } else {
        let h = s.ln() - s_next.ln();
        match variant {
            Variant::Plain => {
                let c_x = s_next / s;
                let c_d = -(-h).exp_m1();
                match (&state.old_denoised, state.h_last) {
                    (Some(old), Some(h_last)) => {
                        let r = h_last / h;
                        let a = 1.0 + 1.0 / (2.0 * r);
                        let b = 1.0 / (2.0 * r);
                        for ((x, d), o) in state.x.iter_mut().zip(&denoised).zip(old) {
                            *x = c_x * *x + c_d * (a * d - b * o);
                        }
                    }
                    _ => {
                        for (x, d) in state.x.iter_mut().zip(&denoised) {
                            *x = c_x * *x + c_d * d;
                        }
                    }
                }
            }
            Variant::Sde => {
                let eta_h = h;
                let c_x = s_next / s * (-eta_h).exp();
                let c_d = -(-h - eta_h).exp_m1();
                let noise_scale = s_next * (-(-2.0 * eta_h).exp_m1()).sqrt();
                let correction = match (&state.old_denoised, state.h_last) {
                    (Some(old), Some(h_last)) => Some((old, 0.5 * c_d * h / h_last)),
                    _ => None,
                };
                let noise = gaussian_vec(rng, state.x.len());
                for (k, x) in state.x.iter_mut().enumerate() {
                    let mut v = c_x * *x + c_d * denoised[k];
                    if let Some((old, c)) = correction {
                        v += c * (denoised[k] - old[k]);
                    }
                    *x = v + noise_scale * noise[k];
                }
            }
        }
        state.h_last = Some(h);
    }
    state.old_denoised = Some(denoised);
    state.step += 1;
    Ok(())
}

fn sigmas_for(schedule: &NoiseSchedule, steps: usize, karras: bool) -> Result<Vec<f64>> {
    if karras {
        Ok(karras_sigmas(steps, schedule.sigma_min(), schedule.sigma_max(), KARRAS_RHO)?.sigmas)
    } else {
        schedule.uniform_sigmas(steps)
    }
}

/// Draws one sample of the given geometry. `steps` is the number of denoiser
/// calls for DPM++ samplers; the linear sampler always walks the whole
/// schedule. Output is deterministic given `seed`.
#[allow(clippy::too_many_arguments)]
pub fn sample(
    denoiser: &dyn Denoiser,
    schedule: &NoiseSchedule,
    sampler: SamplerKind,
    steps: usize,
    geometry: Geometry,
    cond: Option<&Condition>,
    seed: u64,
) -> Result<SampleOutput> {
    let Some((variant, karras)) = sampler.variant() else {
        return linear_sample(denoiser, schedule, geometry, cond, seed);
    };
    let sigmas = sigmas_for(schedule, steps, karras)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = SamplerState::from_noise(gaussian_vec(&mut rng, geometry.len()), sigmas[0]);
    let mut trajectory = Vec::with_capacity(steps);
    while state.step + 1 < sigmas.len() {
        let s = sigmas[state.step];
        dpmpp_2m_step(&mut state, denoiser, geometry, &sigmas, schedule, variant, cond, &mut rng)?;
        trajectory.push(TrajectoryRecord::of(state.step - 1, s, schedule.sigma_to_t(s), &state.x));
    }
    Ok(SampleOutput {
        volume: Volume::from_parts_unchecked(geometry, state.x, IntensityKind::Arbitrary),
        trajectory,
    })
}

/// `(c0, ct, var)` of the DDPM posterior `q(x_{t−1} | x_t, x₀)`:
/// mean `c0·x₀ + ct·x_t`, variance `var`; `ᾱ_{−1} = 1`.
pub fn posterior_coefficients(schedule: &NoiseSchedule, t: usize) -> (f64, f64, f64) {
    let ab = schedule.alpha_bar[t];
    let ab_prev = if t == 0 { 1.0 } else { schedule.alpha_bar[t - 1] };
    let beta = schedule.betas[t];
    let c0 = ab_prev.sqrt() * beta / (1.0 - ab);
    let ct = schedule.alphas[t].sqrt() * (1.0 - ab_prev) / (1.0 - ab);
    let var = beta * (1.0 - ab_prev) / (1.0 - ab);
    (c0, ct, var)
}

/// One ancestral step from `x_t` given the prediction `x0`; no noise at t = 0.
pub(crate) fn ancestral_step(
    schedule: &NoiseSchedule,
    t: usize,
    x_t: &mut [f64],
    x0: &[f64],
    rng: &mut ChaCha8Rng,
) {
    let (c0, ct, var) = posterior_coefficients(schedule, t);
    let sd = var.sqrt();
    for (x, p) in x_t.iter_mut().zip(x0) {
        let mut v = c0 * p + ct * *x;
        if t > 0 {
            let e: f64 = StandardNormal.sample(rng);
            v += sd * e;
        }
        *x = v;
    }
}

/// Ancestral DDPM from `x_{T−1} ~ N(0, I)` down to `x₀`.
pub fn linear_sample(
    denoiser: &dyn Denoiser,
    schedule: &NoiseSchedule,
    geometry: Geometry,
    cond: Option<&Condition>,
    seed: u64,
) -> Result<SampleOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = gaussian_vec(&mut rng, geometry.len());
    let sigmas = schedule.sigmas();
    let mut trajectory = Vec::with_capacity(schedule.len());
    for t in (0..schedule.len()).rev() {
        let level = NoiseLevel {
            sigma: sigmas[t],
            alpha_bar: schedule.alpha_bar[t],
            timestep: t as f64,
        };
        let xt = Volume::from_parts_unchecked(geometry, x, IntensityKind::Arbitrary);
        let x0 = denoiser.denoise(&xt, level, cond)?;
        x0.geometry().ensure_matches(&geometry)?;
        x = xt.into_values();
        ancestral_step(schedule, t, &mut x, x0.values(), &mut rng);
        trajectory.push(TrajectoryRecord::of(schedule.len() - 1 - t, sigmas[t], t as f64, &x));
    }
    Ok(SampleOutput {
        volume: Volume::from_parts_unchecked(geometry, x, IntensityKind::Arbitrary),
        trajectory,
    })
}
