//! Root-raised-cosine pulse shaping and matched filtering.
//!
//! Taps are generated at `sps` samples per symbol with unit energy, so a
//! transmit filter cascaded with its receive-side match gives a raised
//! cosine with unit gain at the symbol instants.

use num_complex::Complex64;

use crate::dsp::fft_convolve_full;
use crate::error::{Error, Result};

/// Root-raised-cosine FIR taps: `span_symbols · sps + 1` symmetric taps
/// covering ±span/2 symbols, normalized to unit energy.
///
/// # Arguments
/// * `rolloff` — excess-bandwidth factor β ∈ [0, 1]
/// * `sps` — samples per symbol; must exceed 1 + β so the shaped band fits
/// * `span_symbols` — filter length in symbols; with β > 0 the span must be
///   at least 1/β symbols, otherwise the truncated tail is too hot for the
///   stopband this filter is expected to deliver
pub fn rrc_taps(rolloff: f64, sps: usize, span_symbols: usize) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&rolloff) {
        return Err(Error::InvalidConfig(format!(
            "RRC roll-off must lie in [0, 1], got {rolloff}"
        )));
    }
    if (sps as f64) < 1.0 + rolloff {
        return Err(Error::InvalidConfig(format!(
            "{sps} samples/symbol cannot represent a roll-off of {rolloff}; need sps ≥ 1 + β"
        )));
    }
    if span_symbols < 8 {
        return Err(Error::InvalidConfig(format!(
            "RRC span of {span_symbols} symbols is too short"
        )));
    }
    if rolloff > 0.0 && (span_symbols as f64) * rolloff < 1.0 {
        return Err(Error::InvalidConfig(format!(
            "RRC span of {span_symbols} symbols is too short for roll-off {rolloff}; need span ≥ 1/β"
        )));
    }
    let len = span_symbols * sps + 1;
    let center = (span_symbols * sps) as f64 / 2.0;
    let mut taps = Vec::with_capacity(len);
    for i in 0..len {
        let t = (i as f64 - center) / sps as f64; // in symbol periods
        taps.push(rrc_impulse(t, rolloff));
    }
    let energy: f64 = taps.iter().map(|h| h * h).sum();
    let norm = energy.sqrt();
    for h in &mut taps {
        *h /= norm;
    }
    Ok(taps)
}

/// The continuous-time RRC impulse response at `t` symbol periods
/// (unnormalized), including the two removable singularities.
fn rrc_impulse(t: f64, beta: f64) -> f64 {
    use std::f64::consts::PI;
    if t.abs() < 1e-9 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    if beta > 0.0 {
        let singular = 1.0 / (4.0 * beta);
        if (t.abs() - singular).abs() < 1e-9 {
            let arg = PI / (4.0 * beta);
            return beta / 2f64.sqrt()
                * ((1.0 + 2.0 / PI) * arg.sin() + (1.0 - 2.0 / PI) * arg.cos());
        }
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}

/// Interpolate symbol-rate samples to `sps` samples per symbol and apply the
/// shaping filter. Returns the full convolution
/// (`symbols.len()·sps + taps.len() − 1` samples); the first symbol peaks
/// `(taps.len()−1)/2` samples in.
pub fn shape(symbols: &[Complex64], taps: &[f64], sps: usize) -> Vec<Complex64> {
    let mut upsampled = vec![Complex64::new(0.0, 0.0); symbols.len() * sps];
    for (i, &s) in symbols.iter().enumerate() {
        upsampled[i * sps] = s;
    }
    fft_convolve_full(&upsampled, taps)
}

/// Apply the receive-side matched filter (same taps); full convolution, so
/// the cascade delay through shape + match is `taps.len() − 1` samples.
pub fn matched_filter(samples: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    fft_convolve_full(samples, taps)
}
