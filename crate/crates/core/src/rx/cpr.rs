//! Pilot-aided carrier phase recovery: one phase estimate per pilot symbol
//! from both polarizations jointly, unwrapped, interpolated across the
//! payload, with the residual carrier offset read off the phase ramp.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// The unwrapped pilot phase trajectory and what it implies.
#[derive(Debug, Clone)]
pub struct PilotPhaseTrack {
    /// Unwrapped carrier phase at each pilot, in radians.
    pub phases: Vec<f64>,
    /// Residual carrier frequency offset implied by the least-squares slope
    /// of the trajectory, in Hz.
    pub residual_cfo_hz: f64,
    /// Mean pilot correlation coherence, in [0, 1].
    pub confidence: f64,
    /// True when the pilots were too noisy to trust the trajectory.
    pub low_confidence: bool,
}

/// Estimate the carrier phase at every pilot.
///
/// `rx_x`/`rx_y` hold the demodulated pilot symbols per polarization,
/// `known_x`/`known_y` the transmitted pilot grid, all laid out as
/// consecutive blocks of `n_sub` values. Pilot `i` contributes
/// `φ_i = arg Σ_k R_i(k)·K*_i(k)` summed over both polarizations; the
/// sequence is unwrapped and its least-squares slope, divided by the pilot
/// period `stride_symbols · symbol_period_s`, gives the residual carrier
/// offset.
pub fn pilot_phase_track(
    rx_x: &[Complex64],
    known_x: &[Complex64],
    rx_y: &[Complex64],
    known_y: &[Complex64],
    n_sub: usize,
    stride_symbols: f64,
    symbol_period_s: f64,
    min_confidence: f64,
) -> Result<PilotPhaseTrack> {
    if n_sub == 0 {
        return Err(Error::InvalidConfig("pilot blocks need n_sub >= 1".into()));
    }
    if !(stride_symbols > 0.0 && symbol_period_s > 0.0)
        || !stride_symbols.is_finite()
        || !symbol_period_s.is_finite()
    {
        return Err(Error::InvalidConfig(format!(
            "pilot stride and symbol period must be positive and finite, got \
             {stride_symbols} and {symbol_period_s}"
        )));
    }
    if !(0.0..=1.0).contains(&min_confidence) {
        return Err(Error::InvalidConfig(format!(
            "confidence threshold must lie in [0, 1], got {min_confidence}"
        )));
    }
    let len = rx_x.len();
    for (name, v) in [
        ("pilot stream Y", rx_y.len()),
        ("known pilots X", known_x.len()),
        ("known pilots Y", known_y.len()),
    ] {
        if v != len {
            return Err(Error::SizeMismatch {
                context: match name {
                    "pilot stream Y" => "pilot stream Y vs X",
                    "known pilots X" => "known pilots X vs received",
                    _ => "known pilots Y vs received",
                },
                expected: len,
                actual: v,
            });
        }
    }
    if len == 0 || len % n_sub != 0 {
        return Err(Error::SizeMismatch {
            context: "pilot stream vs subcarrier count",
            expected: n_sub.max(len),
            actual: len,
        });
    }
    let pilots = len / n_sub;

    let mut phases: Vec<f64> = Vec::with_capacity(pilots);
    let mut coherence_sum = 0.0;
    for i in 0..pilots {
        let lo = i * n_sub;
        let hi = lo + n_sub;
        let mut corr = Complex64::new(0.0, 0.0);
        let mut energy = 0.0;
        for (r, k) in rx_x[lo..hi].iter().zip(&known_x[lo..hi]) {
            corr += r * k.conj();
            energy += r.norm() * k.norm();
        }
        for (r, k) in rx_y[lo..hi].iter().zip(&known_y[lo..hi]) {
            corr += r * k.conj();
            energy += r.norm() * k.norm();
        }
        coherence_sum += if energy > 0.0 { corr.norm() / energy } else { 0.0 };
        let raw = corr.im.atan2(corr.re);
        let phase = match phases.last() {
            Some(&prev) => {
                let turns = ((prev - raw) / std::f64::consts::TAU).round();
                raw + turns * std::f64::consts::TAU
            }
            None => raw,
        };
        phases.push(phase);
    }
    let confidence = coherence_sum / pilots as f64;

    // Least-squares slope in radians per pilot.
    let slope = {
        let n = pilots as f64;
        let mx = (n - 1.0) / 2.0;
        let my = phases.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, p) in phases.iter().enumerate() {
            let dx = i as f64 - mx;
            num += dx * (p - my);
            den += dx * dx;
        }
        if den > 0.0 { num / den } else { 0.0 }
    };
    let residual_cfo_hz = slope / (std::f64::consts::TAU * stride_symbols * symbol_period_s);

    Ok(PilotPhaseTrack {
        phases,
        residual_cfo_hz,
        confidence,
        low_confidence: confidence < min_confidence,
    })
}

/// Phase at `offset` frame symbols after pilot 0, linearly interpolated
/// between neighboring pilots and held flat beyond the ends.
pub fn interpolate_phase(phases: &[f64], stride_symbols: f64, offset: f64) -> f64 {
    if phases.is_empty() {
        return 0.0;
    }
    let t = offset / stride_symbols;
    if t <= 0.0 {
        return phases[0];
    }
    let last = (phases.len() - 1) as f64;
    if t >= last {
        return *phases.last().unwrap();
    }
    let i = t.floor() as usize;
    let frac = t - i as f64;
    phases[i] * (1.0 - frac) + phases[i + 1] * frac
}
