use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discrete variance-preserving schedule: `x_t = √ᾱ_t x₀ + √(1 − ᾱ_t) ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    pub betas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub alpha_bar: Vec<f64>,
}

pub const BETA_START: f64 = 1e-4;
pub const BETA_END: f64 = 0.02;

pub fn linear_schedule(steps: usize) -> Result<NoiseSchedule> {
    linear_schedule_with(steps, BETA_START, BETA_END)
}

pub fn linear_schedule_with(steps: usize, beta_start: f64, beta_end: f64) -> Result<NoiseSchedule> {
    if steps == 0 {
        return Err(Error::InvalidArgument("schedule needs at least one step".into()));
    }
    if !(0.0 < beta_start && beta_start <= beta_end && beta_end < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "betas must satisfy 0 < start <= end < 1, got ({beta_start}, {beta_end})"
        )));
    }
    let betas: Vec<f64> = (0..steps)
        .map(|i| {
            if steps == 1 {
                beta_start
            } else {
                beta_start + (beta_end - beta_start) * i as f64 / (steps - 1) as f64
            }
        })
        .collect();
    NoiseSchedule::from_betas(betas)
}

impl NoiseSchedule {
    pub fn from_betas(betas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() || betas.iter().any(|b| !(*b > 0.0 && *b < 1.0)) {
            return Err(Error::InvalidArgument("betas must lie in (0, 1)".into()));
        }
        let alphas: Vec<f64> = betas.iter().map(|b| 1.0 - b).collect();
        let alpha_bar = alphas
            .iter()
            .scan(1.0, |acc, a| {
                *acc *= a;
                Some(*acc)
            })
            .collect();
        Ok(Self {
            betas,
            alphas,
            alpha_bar,
        })
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    /// `σ_t = √((1 − ᾱ_t)/ᾱ_t)`, increasing in t.
    pub fn sigmas(&self) -> Vec<f64> {
        self.alpha_bar.iter().map(|a| ((1.0 - a) / a).sqrt()).collect()
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigmas()[0]
    }

    pub fn sigma_max(&self) -> f64 {
        *self.sigmas().last().unwrap()
    }

    /// Fractional timestep of `sigma` by linear interpolation in log σ,
    /// clamped to `[0, T − 1]`.
    pub fn sigma_to_t(&self, sigma: f64) -> f64 {
        let logs: Vec<f64> = self.sigmas().iter().map(|s| s.ln()).collect();
        let ls = sigma.ln();
        if ls <= logs[0] {
            return 0.0;
        }
        let last = logs.len() - 1;
        if ls >= logs[last] {
            return last as f64;
        }
        let hi = logs.partition_point(|&l| l < ls);
        let lo = hi - 1;
        let w = (ls - logs[lo]) / (logs[hi] - logs[lo]);
        lo as f64 + w
    }

    /// σ at fractional timestep `t`, interpolated in log σ.
    pub fn t_to_sigma(&self, t: f64) -> f64 {
        let s = self.sigmas();
        let t = t.clamp(0.0, (s.len() - 1) as f64);
        let lo = t.floor() as usize;
        let hi = (lo + 1).min(s.len() - 1);
        let w = t - lo as f64;
        ((1.0 - w) * s[lo].ln() + w * s[hi].ln()).exp()
    }

    /// `n` sigmas at timesteps evenly spaced from T − 1 down to 0, then 0.
    pub fn uniform_sigmas(&self, n: usize) -> Result<Vec<f64>> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 steps, got {n}")));
        }
        let last = (self.len() - 1) as f64;
        let mut out: Vec<f64> = (0..n)
            .map(|i| self.t_to_sigma(last * (1.0 - i as f64 / (n - 1) as f64)))
            .collect();
        out.push(0.0);
        Ok(out)
    }
}

/// Noise levels spaced uniformly in `σ^{1/ρ}`, followed by a final 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KarrasSigmas {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub rho: f64,
    pub sigmas: Vec<f64>,
}

pub const KARRAS_RHO: f64 = 7.0;

pub fn karras_sigmas(n: usize, sigma_min: f64, sigma_max: f64, rho: f64) -> Result<KarrasSigmas> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 sigmas, got {n}")));
    }
    if !(0.0 < sigma_min && sigma_min < sigma_max && rho > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < sigma_min < sigma_max and rho > 0, got ({sigma_min}, {sigma_max}, {rho})"
        )));
    }
    let a = sigma_max.powf(1.0 / rho);
    let b = sigma_min.powf(1.0 / rho);
    let mut sigmas: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 {
                sigma_max
            } else if i == n - 1 {
                sigma_min
            } else {
                (a + i as f64 / (n - 1) as f64 * (b - a)).powf(rho)
            }
        })
        .collect();
    sigmas.push(0.0);
    Ok(KarrasSigmas {
        sigma_min,
        sigma_max,
        rho,
        sigmas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_endpoints_and_monotone() {
        let s = linear_schedule(1000).unwrap();
        assert_eq!(s.betas[0], 1e-4);
        assert_eq!(s.betas[999], 0.02);
        assert!(s.alpha_bar.windows(2).all(|w| w[1] < w[0]));
        let direct: f64 = (0..=10).map(|i| 1.0 - s.betas[i]).product();
        assert!((s.alpha_bar[10] - direct).abs() < 1e-15);
    }

    #[test]
    fn sigma_time_round_trip() {
        let s = linear_schedule(1000).unwrap();
        for t in [0.0, 17.25, 500.0, 998.5, 999.0] {
            assert!((s.sigma_to_t(s.t_to_sigma(t)) - t).abs() < 1e-9);
        }
        let u = s.uniform_sigmas(10).unwrap();
        assert_eq!(u.len(), 11);
        assert!((u[0] - s.sigma_max()).abs() < 1e-12 * s.sigma_max());
        assert_eq!(*u.last().unwrap(), 0.0);
    }

    #[test]
    fn karras_endpoints() {
        let k = karras_sigmas(10, 0.02, 80.0, 7.0).unwrap();
        assert_eq!(k.sigmas[0], 80.0);
        assert_eq!(k.sigmas[9], 0.02);
        assert_eq!(k.sigmas[10], 0.0);
        assert!(k.sigmas.windows(2).all(|w| w[1] < w[0]));
        assert!(karras_sigmas(1, 0.02, 80.0, 7.0).is_err());
        assert!(karras_sigmas(5, 1.0, 1.0, 7.0).is_err());
    }
}
