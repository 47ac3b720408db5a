//! Local-oscillator impairments: a static carrier frequency offset plus
//! Wiener laser phase noise, applied as one multiplicative rotation that is
//! common to both polarizations (a single shared oscillator).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::waveform::DualPol;

/// Multiplies both polarizations by e^{j(2πΔf·n/fs + φ_n)} where φ is a
/// Wiener process with per-sample increment variance 2π·linewidth/fs.
/// The same phase trajectory is applied to both polarizations.
pub fn apply_cfo_phase_noise<R: Rng + ?Sized>(
    wave: &mut DualPol,
    sample_rate: f64,
    cfo_hz: f64,
    linewidth_hz: f64,
    rng: &mut R,
) -> Result<()> {
    if !sample_rate.is_finite() || sample_rate <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "sample rate must be positive, got {sample_rate}"
        )));
    }
    if !cfo_hz.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "carrier frequency offset must be finite, got {cfo_hz}"
        )));
    }
    if !linewidth_hz.is_finite() || linewidth_hz < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "linewidth must be non-negative, got {linewidth_hz}"
        )));
    }
    if (cfo_hz == 0.0 && linewidth_hz == 0.0) || wave.len() == 0 {
        return Ok(());
    }
    let n = wave.len();
    let omega = 2.0 * PI * cfo_hz / sample_rate; // CFO advance per sample
    let sigma = (2.0 * PI * linewidth_hz / sample_rate).sqrt(); // Wiener step
    let mut phase = 0.0f64;
    let mut rotation = Vec::with_capacity(n);
    for i in 0..n {
        if linewidth_hz > 0.0 {
            let step: f64 = rng.sample(StandardNormal);
            phase += sigma * step;
        }
        rotation.push(Complex64::from_polar(1.0, omega * i as f64 + phase));
    }
    wave.for_each_pol(|pol| {
        for (v, r) in pol.iter_mut().zip(&rotation) {
            *v *= r;
        }
    });
    Ok(())
}
