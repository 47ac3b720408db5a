//! Sampling-clock offset: resamples the waveform at a rate (1 + ppm·1e−6)
//! with a band-limited fractional-delay interpolator, so the sampling phase
//! drifts linearly with sample index. The interpolator is a 32-tap
//! Blackman-Harris-windowed sinc evaluated through a 1024-phase polyphase
//! table with linear interpolation between phases.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::waveform::DualPol;

/// Input samples on each side of the interpolation point.
const HALF_TAPS: usize = 16;
const TAPS: usize = 2 * HALF_TAPS;
/// Fractional-delay quantization of the polyphase table.
const PHASE_STEPS: usize = 1024;

fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-12 {
        1.0
    } else {
        let pt = std::f64::consts::PI * t;
        pt.sin() / pt
    }
}

/// Four-term Blackman-Harris window over |t| <= HALF_TAPS.
fn window(t: f64) -> f64 {
    let arg = std::f64::consts::PI * t / HALF_TAPS as f64;
    0.35875 + 0.48829 * arg.cos() + 0.14128 * (2.0 * arg).cos() + 0.01168 * (3.0 * arg).cos()
}

/// Windowed-sinc filter rows for PHASE_STEPS+1 fractional delays in [0, 1].
/// Row p interpolates at offset μ = p/PHASE_STEPS between input samples;
/// each row is normalized to unit DC gain.
fn build_phase_table() -> Vec<[f64; TAPS]> {
    let mut table = Vec::with_capacity(PHASE_STEPS + 1);
    for p in 0..=PHASE_STEPS {
        let mu = p as f64 / PHASE_STEPS as f64;
        let mut row = [0.0f64; TAPS];
        let mut sum = 0.0;
        for (j, tap) in row.iter_mut().enumerate() {
            let t = (j as f64 - (HALF_TAPS - 1) as f64) - mu;
            *tap = sinc(t) * window(t);
            sum += *tap;
        }
        for tap in row.iter_mut() {
            *tap /= sum;
        }
        table.push(row);
    }
    table
}

/// Evaluates `signal` at positions n·ratio (in input-sample units) for
/// n = 0.. while the position stays inside the input. Samples outside the
/// input are treated as zero, so the first and last few outputs carry
/// filter ramp-in.
pub fn resample(signal: &[Complex64], ratio: f64) -> Vec<Complex64> {
    assert!(ratio.is_finite() && ratio > 0.0, "resample ratio {ratio}");
    if signal.is_empty() {
        return Vec::new();
    }
    let table = build_phase_table();
    let last = (signal.len() - 1) as f64;
    let out_len = (last / ratio).floor() as usize + 1;
    let mut out = Vec::with_capacity(out_len);
    for n in 0..out_len {
        let pos = n as f64 * ratio;
        let i0 = pos.floor() as isize;
        let mu = pos - i0 as f64;
        let pf = mu * PHASE_STEPS as f64;
        let p = pf.floor() as usize;
        let lambda = pf - p as f64;
        let (row_a, row_b) = (&table[p], &table[p + 1]);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..TAPS {
            let idx = i0 - (HALF_TAPS as isize - 1) + j as isize;
            if idx >= 0 && (idx as usize) < signal.len() {
                let h = (1.0 - lambda) * row_a[j] + lambda * row_b[j];
                acc += signal[idx as usize] * h;
            }
        }
        out.push(acc);
    }
    out
}

/// Applies a sampling-clock offset of `ppm` parts per million to both
/// polarizations: output sample n is the input evaluated at position
/// n·(1 + ppm·1e−6), so the cumulative sampling-phase drift after S
/// samples is S·ppm·1e−6 samples. `ppm = 0` is an exact pass-through.
pub fn apply_clock_offset(wave: &mut DualPol, ppm: f64) -> Result<()> {
    if !ppm.is_finite() || ppm.abs() >= 1000.0 {
        return Err(Error::InvalidConfig(format!(
            "clock offset must satisfy |ppm| < 1000, got {ppm}"
        )));
    }
    if ppm == 0.0 || wave.len() == 0 {
        return Ok(());
    }
    let ratio = 1.0 + ppm * 1e-6;
    wave.for_each_pol(|pol| {
        *pol = resample(pol, ratio);
    });
    Ok(())
}
