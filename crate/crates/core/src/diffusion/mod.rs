//! Diffusion mathematics: noise schedules, the DPM++ 2M family, the ancestral
//! baseline sampler, known-region replacement, blurred inpainting masks and
//! condition assembly.

mod condition;
mod denoiser;
mod mask;
mod patch;
mod repaint;
mod sampler;
mod schedule;

pub use condition::{assemble_condition, nearest_downsample, Condition, ConditionMode};
pub use denoiser::{Denoiser, GaussianDenoiser, NoiseLevel, PointMass};
pub use mask::{build_blur_mask, build_blur_mask_with, BlurMask, MaskMode, MASK_BLUR_FACTOR, MASK_DILATION};
pub use patch::sample_patch;
pub use repaint::{forward_noise, repaint_replace, repaint_sample, step_rng};
pub use sampler::{
    dpmpp_2m_step, linear_sample, posterior_coefficients, sample, write_trajectory_jsonl, SampleOutput,
    SamplerKind, SamplerState, TrajectoryRecord, Variant,
};
pub use schedule::{
    karras_sigmas, linear_schedule, linear_schedule_with, KarrasSigmas, NoiseSchedule, BETA_END,
    BETA_START, KARRAS_RHO,
};
