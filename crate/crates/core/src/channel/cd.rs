//! Chromatic dispersion of standard single-mode fiber, modeled as the
//! frequency-domain all-pass response exp(−jπDλ²f²L/c), plus its exact
//! inverse used by the receiver's dispersion compensation stage.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsp::{fft_forward, fft_frequencies, fft_inverse};
use crate::error::{Error, Result};
use crate::waveform::DualPol;

/// Speed of light in vacuum (m/s).
pub const C_LIGHT: f64 = 299_792_458.0;

/// Span-by-span description of the amplified fiber plant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberSpec {
    /// Number of identical amplified spans; 0 removes the fiber entirely.
    pub span_count: usize,
    /// Length of a single span in km.
    pub span_length_km: f64,
    /// Dispersion coefficient in ps/(nm·km).
    pub dispersion_ps_nm_km: f64,
    /// Carrier wavelength in nm.
    pub wavelength_nm: f64,
}

impl Default for FiberSpec {
    fn default() -> Self {
        Self {
            span_count: 25,
            span_length_km: 80.0,
            dispersion_ps_nm_km: 17.0,
            wavelength_nm: 1550.1,
        }
    }
}

impl FiberSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.span_length_km.is_finite() || self.span_length_km <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "span length must be positive, got {}",
                self.span_length_km
            )));
        }
        if !self.dispersion_ps_nm_km.is_finite() || self.dispersion_ps_nm_km <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "dispersion coefficient must be positive, got {}",
                self.dispersion_ps_nm_km
            )));
        }
        if !self.wavelength_nm.is_finite() || self.wavelength_nm <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "wavelength must be positive, got {}",
                self.wavelength_nm
            )));
        }
        Ok(())
    }

    /// Total link length in metres.
    pub fn total_length_m(&self) -> f64 {
        self.span_count as f64 * self.span_length_km * 1e3
    }

    /// Dispersion coefficient in SI units, s/m².
    pub fn dispersion_si(&self) -> f64 {
        self.dispersion_ps_nm_km * 1e-6
    }

    /// Coefficient K of the quadratic phase response φ(f) = −K·f²,
    /// K = πDλ²L/c.
    fn phase_coefficient(&self) -> f64 {
        let lambda_m = self.wavelength_nm * 1e-9;
        PI * self.dispersion_si() * lambda_m * lambda_m * self.total_length_m() / C_LIGHT
    }
}

/// Multiplies each polarization's spectrum by exp(j·sign·K·f²).
fn apply_quadratic_phase(wave: &mut DualPol, sample_rate: f64, coeff: f64) {
    let n = wave.len();
    if n == 0 || coeff == 0.0 {
        return;
    }
    let freqs = fft_frequencies(n, sample_rate);
    let response: Vec<Complex64> = freqs
        .iter()
        .map(|&f| Complex64::from_polar(1.0, coeff * f * f))
        .collect();
    wave.for_each_pol(|pol| {
        fft_forward(pol);
        for (v, h) in pol.iter_mut().zip(&response) {
            *v *= h;
        }
        fft_inverse(pol);
    });
}

/// Propagates the waveform through the fiber's chromatic dispersion:
/// all-pass, energy-preserving, quadratic spectral phase −πDλ²f²L/c.
pub fn apply_cd(wave: &mut DualPol, sample_rate: f64, fiber: &FiberSpec) -> Result<()> {
    fiber.validate()?;
    if !sample_rate.is_finite() || sample_rate <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "sample rate must be positive, got {sample_rate}"
        )));
    }
    apply_quadratic_phase(wave, sample_rate, -fiber.phase_coefficient());
    Ok(())
}

/// Exact inverse of [`apply_cd`]: the receiver-side dispersion
/// compensation filter with conjugate phase +πDλ²f²L/c.
pub fn compensate_cd(wave: &mut DualPol, sample_rate: f64, fiber: &FiberSpec) -> Result<()> {
    fiber.validate()?;
    if !sample_rate.is_finite() || sample_rate <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "sample rate must be positive, got {sample_rate}"
        )));
    }
    apply_quadratic_phase(wave, sample_rate, fiber.phase_coefficient());
    Ok(())
}
