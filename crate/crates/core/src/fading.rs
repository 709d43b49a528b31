//! Small-scale fading: per-RB block Rayleigh with first-order autoregressive
//! time correlation, or a flat AWGN channel.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::units::{kmh_to_ms, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingMode {
    Awgn,
    Rayleigh,
}

pub fn doppler_hz(speed_kmh: f64, carrier_hz: f64) -> f64 {
    kmh_to_ms(speed_kmh) * carrier_hz / SPEED_OF_LIGHT
}

/// Clarke coherence time, 9 / (16 pi f_d). Infinite for a static receiver.
pub fn coherence_time_s(doppler_hz: f64) -> f64 {
    if doppler_hz <= 0.0 {
        f64::INFINITY
    } else {
        9.0 / (16.0 * std::f64::consts::PI * doppler_hz)
    }
}

/// Fading state of one link across all resource blocks.
#[derive(Debug, Clone)]
pub struct FadingProcess {
    mode: FadingMode,
    coherence_s: f64,
    re: Vec<f64>,
    im: Vec<f64>,
    power: Vec<f64>,
}

impl FadingProcess {
    pub fn new<R: Rng + ?Sized>(mode: FadingMode, n_rb: usize, speed_kmh: f64, carrier_hz: f64, rng: &mut R) -> Self {
        let coherence_s = coherence_time_s(doppler_hz(speed_kmh, carrier_hz));
        let mut p = FadingProcess { mode, coherence_s, re: Vec::new(), im: Vec::new(), power: vec![1.0; n_rb] };
        if mode == FadingMode::Rayleigh {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            p.re = (0..n_rb).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect();
            p.im = (0..n_rb).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect();
            p.refresh_power();
        }
        p
    }

    pub fn mode(&self) -> FadingMode {
        self.mode
    }

    pub fn coherence_time_s(&self) -> f64 {
        self.coherence_s
    }

    /// One-step correlation of the complex gain for a step of `dt_ms`.
    pub fn correlation(&self, dt_ms: f64) -> f64 {
        if self.coherence_s.is_infinite() {
            1.0
        } else {
            (-dt_ms * 1e-3 / self.coherence_s).exp()
        }
    }

    /// Current per-RB power gains (mean 1).
    pub fn gains(&self) -> &[f64] {
        &self.power
    }

    fn refresh_power(&mut self) {
        for ((p, re), im) in self.power.iter_mut().zip(&self.re).zip(&self.im) {
            *p = re * re + im * im;
        }
    }
}

/// Advances the process by `dt_ms` and returns the per-RB power gains.
pub fn sample_fading<'a, R: Rng + ?Sized>(state: &'a mut FadingProcess, dt_ms: f64, rng: &mut R) -> &'a [f64] {
    if state.mode == FadingMode::Rayleigh {
        let rho = state.correlation(dt_ms);
        if rho < 1.0 {
            let innov = (0.5 * (1.0 - rho * rho)).sqrt();
            for (re, im) in state.re.iter_mut().zip(state.im.iter_mut()) {
                *re = rho * *re + innov * rng.sample::<f64, _>(StandardNormal);
                *im = rho * *im + innov * rng.sample::<f64, _>(StandardNormal);
            }
            state.refresh_power();
        }
    }
    &state.power
}
