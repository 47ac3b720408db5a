//! Cascaded wavelength-selective-switch filtering. Each pass multiplies the
//! spectrum by the same super-Gaussian magnitude response (no phase), so a
//! cascade of `count` switches narrows the composite 10-dB bandwidth in a
//! closed form that the calibration routine inverts.

use serde::{Deserialize, Serialize};

use crate::dsp::{fft_forward, fft_frequencies, fft_inverse};
use crate::error::{Error, Result};
use crate::waveform::DualPol;

/// Super-Gaussian order shared by every switch in the calibrated model.
pub const CALIBRATED_ORDER: u32 = 11;
/// Per-switch 3-dB bandwidth (GHz) fitted to the measured cascade bandwidths.
pub const CALIBRATED_FILTER_3DB_GHZ: f64 = 121.946228603872;

/// Cascade of identical super-Gaussian band-pass switches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WssSpec {
    /// Number of switches traversed; 0 disables filtering.
    pub cascade: usize,
    /// Channel grid width in GHz (must stay below the simulation bandwidth).
    pub grid_ghz: f64,
    /// Super-Gaussian order n of a single switch.
    pub order: u32,
    /// 3-dB (half-power) two-sided bandwidth of a single switch, in GHz.
    pub filter_3db_ghz: f64,
}

impl Default for WssSpec {
    fn default() -> Self {
        Self::calibrated(0)
    }
}

impl WssSpec {
    /// Spec with the fitted order and per-switch bandwidth and the given
    /// cascade depth.
    pub fn calibrated(cascade: usize) -> Self {
        Self {
            cascade,
            grid_ghz: 125.0,
            order: CALIBRATED_ORDER,
            filter_3db_ghz: CALIBRATED_FILTER_3DB_GHZ,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(Error::InvalidConfig("filter order must be >= 1".into()));
        }
        if !self.filter_3db_ghz.is_finite() || self.filter_3db_ghz <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "filter 3-dB bandwidth must be positive, got {}",
                self.filter_3db_ghz
            )));
        }
        if !self.grid_ghz.is_finite() || self.grid_ghz <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "grid bandwidth must be positive, got {}",
                self.grid_ghz
            )));
        }
        Ok(())
    }

    /// Amplitude response of a single switch at frequency `f_hz`:
    /// |H(f)| = exp(−(ln2/2)·(2f/B₃)^{2n}).
    pub fn amplitude(&self, f_hz: f64) -> f64 {
        let b3_hz = self.filter_3db_ghz * 1e9;
        let x = (2.0 * f_hz / b3_hz).abs();
        (-0.5 * std::f64::consts::LN_2 * x.powi(2 * self.order as i32)).exp()
    }

    /// Two-sided 10-dB bandwidth of the full cascade in GHz:
    /// B₁₀ = B₃·(log₂10/count)^{1/(2n)}. Infinite when the cascade is empty.
    pub fn cascade_bw10_ghz(&self) -> f64 {
        if self.cascade == 0 {
            return f64::INFINITY;
        }
        let exponent = 1.0 / (2.0 * self.order as f64);
        self.filter_3db_ghz * (std::f64::consts::LOG2_10 / self.cascade as f64).powf(exponent)
    }
}

/// Multiplies both polarizations' spectra by the cascade's magnitude
/// response |H(f)|^count.
pub fn apply_wss_cascade(wave: &mut DualPol, sample_rate: f64, spec: &WssSpec) -> Result<()> {
    spec.validate()?;
    if !sample_rate.is_finite() || sample_rate <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "sample rate must be positive, got {sample_rate}"
        )));
    }
    if spec.grid_ghz * 1e9 >= sample_rate {
        return Err(Error::InvalidConfig(format!(
            "grid bandwidth {} GHz does not fit the sampled bandwidth {} GHz",
            spec.grid_ghz,
            sample_rate / 1e9
        )));
    }
    if spec.cascade == 0 || wave.len() == 0 {
        return Ok(());
    }
    let n = wave.len();
    let count = spec.cascade as f64;
    let gains: Vec<f64> = fft_frequencies(n, sample_rate)
        .iter()
        .map(|&f| spec.amplitude(f).powf(count))
        .collect();
    wave.for_each_pol(|pol| {
        fft_forward(pol);
        for (v, &g) in pol.iter_mut().zip(&gains) {
            *v *= g;
        }
        fft_inverse(pol);
    });
    Ok(())
}

/// Outcome of fitting the single-switch model to measured cascade
/// bandwidths.
#[derive(Debug, Clone, PartialEq)]
pub struct WssCalibration {
    /// Best integer super-Gaussian order.
    pub order: u32,
    /// Least-squares per-switch 3-dB bandwidth in GHz.
    pub filter_3db_ghz: f64,
    /// Fitted-minus-target 10-dB bandwidth for each input point, in GHz.
    pub residuals_ghz: Vec<f64>,
}

/// Fits (order, per-switch 3-dB bandwidth) so that the model's cascade
/// 10-dB bandwidths reproduce the measured `targets`, given as
/// (cascade count, 10-dB bandwidth in GHz) pairs. The order is searched
/// over 1..=16; for each order the bandwidth has a closed-form
/// least-squares solution because B₁₀(count) is linear in B₃.
pub fn calibrate(targets: &[(usize, f64)]) -> Result<WssCalibration> {
    if targets.is_empty() {
        return Err(Error::InvalidConfig(
            "calibration needs at least one (cascade, bandwidth) target".into(),
        ));
    }
    for &(count, bw) in targets {
        if count == 0 {
            return Err(Error::InvalidConfig(
                "calibration targets need a cascade count >= 1".into(),
            ));
        }
        if !bw.is_finite() || bw <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "calibration target bandwidth must be positive, got {bw}"
            )));
        }
    }
    let mut best: Option<(f64, WssCalibration)> = None;
    for order in 1..=16u32 {
        let exponent = 1.0 / (2.0 * order as f64);
        let gains: Vec<f64> = targets
            .iter()
            .map(|&(count, _)| (std::f64::consts::LOG2_10 / count as f64).powf(exponent))
            .collect();
        let num: f64 = gains
            .iter()
            .zip(targets)
            .map(|(&g, &(_, bw))| g * bw)
            .sum();
        let den: f64 = gains.iter().map(|&g| g * g).sum();
        let b3 = num / den;
        let residuals: Vec<f64> = gains
            .iter()
            .zip(targets)
            .map(|(&g, &(_, bw))| b3 * g - bw)
            .collect();
        let worst = residuals.iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
        if best.as_ref().is_none_or(|(w, _)| worst < *w) {
            best = Some((
                worst,
                WssCalibration {
                    order,
                    filter_3db_ghz: b3,
                    residuals_ghz: residuals,
                },
            ));
        }
    }
    let (_, calibration) = best.expect("order search range is non-empty");
    Ok(calibration)
}
