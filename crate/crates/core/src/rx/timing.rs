//! Tone-aided timing recovery: a timing-error detector that correlates the
//! two inserted tone lines in the block spectrum, and a closed PI loop that
//! retimes the waveform onto the chip grid with a cubic interpolator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsp::fft_forward;
use crate::error::{Error, Result};
use crate::waveform::DualPol;

/// Closed-loop timing recovery configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingConfig {
    /// Chips produced per loop update; also the TED block size.
    pub block_chips: usize,
    /// Tone divisor K: the tones sit at ±(chip rate)/K.
    pub tone_divisor: u32,
    /// The TED sums 2·l spectral bins around each tone line.
    pub half_window: usize,
    /// Proportional gain (fraction of the measured error corrected per block).
    pub kp: f64,
    /// Integral gain per block.
    pub ki: f64,
    /// Minimum ratio of tone-line bin power to the median bin power before
    /// the loop declares the tones missing.
    pub min_tone_ratio: f64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            block_chips: 512,
            tone_divisor: 4,
            half_window: 8,
            kp: 0.25,
            ki: 0.02,
            min_tone_ratio: 6.0,
        }
    }
}

impl TimingConfig {
    fn validate(&self) -> Result<()> {
        if self.tone_divisor < 2 {
            return Err(Error::InvalidConfig(format!(
                "tone divisor must be at least 2, got {}",
                self.tone_divisor
            )));
        }
        if self.block_chips == 0 || self.block_chips % self.tone_divisor as usize != 0 {
            return Err(Error::InvalidConfig(format!(
                "TED block of {} chips must be a positive multiple of the tone divisor {}",
                self.block_chips, self.tone_divisor
            )));
        }
        let line_bin = self.block_chips / self.tone_divisor as usize;
        if self.half_window == 0 || self.half_window > line_bin {
            return Err(Error::InvalidConfig(format!(
                "TED half-window {} must lie in 1..={line_bin} for {}-chip blocks",
                self.half_window, self.block_chips
            )));
        }
        if !(self.kp.is_finite() && self.ki.is_finite() && self.kp > 0.0 && self.ki >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "loop gains must be finite with kp > 0 and ki >= 0, got kp={} ki={}",
                self.kp, self.ki
            )));
        }
        if !(self.min_tone_ratio.is_finite() && self.min_tone_ratio >= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "tone detection ratio must be >= 1, got {}",
                self.min_tone_ratio
            )));
        }
        Ok(())
    }
}

/// Retimed chip stream plus the loop's own telemetry.
#[derive(Debug, Clone)]
pub struct TimingOutput {
    /// One sample per chip, both polarizations.
    pub chips: DualPol,
    /// Accumulated sampling-position offset (in input samples) at the start
    /// of each block, relative to a nominal fixed-rate grid.
    pub trace: Vec<f64>,
    /// Clock-rate offset estimate from the trace slope, in ppm. Positive
    /// means the incoming waveform runs fast (its content is compressed).
    pub ppm_estimate: f64,
}

/// Tone-pair timing-error detector.
///
/// `spectrum` is the FFT of one block of `n` samples taken at `sps` samples
/// per chip. The tone lines sit `f = n/(sps·K)` bins from DC; the detector
/// correlates a window of bins around the +tone against the mirrored window
/// around the −tone:
///
/// `e = Σ_{k=f−l}^{f+l−1} Im[X(k) · X*(n − 2f + k)]`
///
/// For a sampling-phase advance of τ samples this behaves as
/// `A·sin(4πτ/(sps·K))` with `A > 0`, so `e` crosses zero with positive
/// slope at the lock point and peaks at τ = sps·K/8.
pub fn tone_timing_error(spectrum: &[Complex64], sps: usize, k_div: u32, l: usize) -> Result<f64> {
    Ok(tone_correlation(spectrum, sps, k_div, l)?.im)
}

/// The complex correlation behind [`tone_timing_error`]; its argument is
/// `4πτ/(sps·K)`, which the closed loop uses directly.
pub(crate) fn tone_correlation(
    spectrum: &[Complex64],
    sps: usize,
    k_div: u32,
    l: usize,
) -> Result<Complex64> {
    let n = spectrum.len();
    if sps == 0 || k_div < 2 {
        return Err(Error::InvalidConfig(format!(
            "TED needs sps >= 1 and a tone divisor >= 2, got sps={sps} K={k_div}"
        )));
    }
    let period = sps * k_div as usize;
    if n == 0 || n % period != 0 {
        return Err(Error::InvalidConfig(format!(
            "TED block length {n} must be a multiple of sps·K = {period}"
        )));
    }
    let f = n / period;
    if l == 0 || l > f {
        return Err(Error::InvalidConfig(format!(
            "TED half-window {l} must lie in 1..={f} for a block of {n}"
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for k in (f - l)..(f + l) {
        acc += spectrum[k] * spectrum[n - 2 * f + k].conj();
    }
    Ok(acc)
}

/// Coarse carrier-frequency-offset estimate from the timing-tone pair.
///
/// The transmitter inserts the tones at exactly ±(chip rate)/K, so any
/// common displacement of the two spectral peaks from those frequencies
/// is carrier offset. Peaks are searched over ±(tone frequency)/16 in a
/// long FFT taken from the middle of the capture, with quadratic
/// interpolation for the sub-bin part; both lines are averaged.
///
/// Removing this offset before timing recovery puts the tones back on
/// exact TED bins, where leakage does not mix frame structure into the
/// phase detector (and where the tone notches later remove them fully).
pub fn tone_cfo_estimate(
    wave: &DualPol,
    sample_rate: f64,
    chip_rate: f64,
    k_div: u32,
) -> Result<f64> {
    if k_div < 2 || !(chip_rate > 0.0) || !(sample_rate >= chip_rate) {
        return Err(Error::InvalidConfig(format!(
            "tone CFO estimation needs K >= 2 and sample rate >= chip rate, \
             got K={k_div}, fs={sample_rate}, chip rate={chip_rate}"
        )));
    }
    let n_in = wave.len();
    if n_in < 1024 {
        return Err(Error::InvalidConfig(format!(
            "waveform of {n_in} samples is too short for tone CFO estimation"
        )));
    }
    let n = 1usize << (63 - (n_in.min(1 << 16) as u64).leading_zeros());
    let start = (n_in - n) / 2;
    let mut power = vec![0.0f64; n];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for pol in [&wave.x, &wave.y] {
        buf.copy_from_slice(&pol[start..start + n]);
        fft_forward(&mut buf);
        for (p, v) in power.iter_mut().zip(&buf) {
            *p += v.norm_sqr();
        }
    }
    let f_tone = chip_rate / k_div as f64;
    let bin_tone = f_tone / sample_rate * n as f64;
    let search = (bin_tone / 16.0).round().max(2.0) as usize;
    let locate = |center: f64| -> f64 {
        let c = center.round() as isize;
        let lo = (c - search as isize).max(1) as usize;
        let hi = ((c + search as isize) as usize).min(n - 2);
        let mut best = lo;
        for i in lo..=hi {
            if power[i] > power[best] {
                best = i;
            }
        }
        // Quadratic vertex through the peak bin and its neighbors.
        let (a, b, c2) = (power[best - 1], power[best], power[best + 1]);
        let denom = a - 2.0 * b + c2;
        let frac = if denom.abs() > 0.0 {
            (0.5 * (a - c2) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        best as f64 + frac
    };
    let d_plus = locate(bin_tone) - bin_tone;
    let d_minus = locate(n as f64 - bin_tone) - (n as f64 - bin_tone);
    Ok(0.5 * (d_plus + d_minus) * sample_rate / n as f64)
}

/// Catmull-Rom interpolation of a complex stream at a fractional position.
/// Positions outside the stream read as zero.
fn interp(signal: &[Complex64], pos: f64) -> Complex64 {
    let i = pos.floor() as isize;
    let mu = pos - i as f64;
    let at = |j: isize| -> Complex64 {
        if j >= 0 && (j as usize) < signal.len() {
            signal[j as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let p0 = at(i - 1);
    let p1 = at(i);
    let p2 = at(i + 1);
    let p3 = at(i + 2);
    // Horner form of the Catmull-Rom cubic.
    p1 + 0.5 * mu * (p2 - p0 + mu * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + mu * (3.0 * (p1 - p2) + p3 - p0)))
}

/// Recover the chip clock from the inserted tone pair.
///
/// Acquisition first measures the tone phase open-loop on each of the
/// leading blocks (nominal-rate sampling) and fits a line to the
/// unwrapped phases, which yields the initial sampling-phase offset *and*
/// the clock-rate offset in one shot. The closed PI loop then starts at
/// lock with its integrator preloaded and only has to track, so even the
/// first chips — where the training sequence lives — come out clean.
/// The loop absorbs a static offset within ±K/4 chips (integer-chip
/// ambiguity is left to frame synchronization) plus any residual rate.
pub fn timing_recovery(wave: &DualPol, sps: usize, cfg: &TimingConfig) -> Result<TimingOutput> {
    cfg.validate()?;
    if sps == 0 {
        return Err(Error::InvalidConfig("need at least one sample per chip".into()));
    }
    let n_in = wave.len();
    let cpb = cfg.block_chips;
    let k_div = cfg.tone_divisor;
    let span_per_block = cpb as f64 * sps as f64;
    let min_blocks = 4;
    if (n_in as f64) < span_per_block * min_blocks as f64 + 8.0 {
        return Err(Error::InvalidConfig(format!(
            "waveform of {n_in} samples is too short for timing recovery \
             ({min_blocks} blocks of {cpb} chips at {sps} samples/chip)"
        )));
    }
    let line_bin = cpb / k_div as usize;
    // Maximum measurable error: arg ∈ (−π, π] maps to ±(K/4)·sps samples.
    let eps_max = k_div as f64 / 4.0 * sps as f64;
    // Phase (radians) on a chip-spaced block → sampling offset in input
    // samples.
    let rad_to_samples = k_div as f64 / (4.0 * std::f64::consts::PI) * sps as f64;

    // Room for the interpolator's look-back tap plus the largest
    // acquisition jump.
    let pos0 = 1.0 + eps_max;
    let mut block_x = vec![Complex64::new(0.0, 0.0); cpb];
    let mut block_y = vec![Complex64::new(0.0, 0.0); cpb];

    // --- Acquisition: open-loop tone-phase survey over the leading blocks ---
    //
    // Per-block complex tone correlations u_b are combined without ever
    // unwrapping phases: the averaged inter-block product Σ u_{b+1}·u_b*
    // gives the phase step per block (the rate), and the circular mean of
    // the back-rotated u_b gives the offset. Both are magnitude-weighted,
    // so a block whose correlation is corrupted (the training sequence's
    // two-repeat comb puts deterministic energy on the tone bins, and a
    // carrier offset modulates that bias) cannot bend the estimate the
    // way an outlier bends a least-squares phase fit. Block 0 — all
    // training sequence — is skipped outright.
    let avail = ((n_in as f64 - pos0 - 3.0) / span_per_block).floor() as usize;
    let first_block = 1usize;
    let b_acq = (avail - first_block).min(12);
    let mut corr: Vec<Complex64> = Vec::with_capacity(b_acq);
    for b in first_block..first_block + b_acq {
        for (block, pol) in [(&mut block_x, &wave.x), (&mut block_y, &wave.y)] {
            let mut p = pos0 + b as f64 * span_per_block;
            for s in block.iter_mut() {
                *s = interp(pol, p);
                p += sps as f64;
            }
            fft_forward(block);
        }
        let u = tone_correlation(&block_x, 1, k_div, cfg.half_window)?
            + tone_correlation(&block_y, 1, k_div, cfg.half_window)?;
        corr.push(if u.is_finite() { u } else { Complex64::new(0.0, 0.0) });
    }
    let mut d = Complex64::new(0.0, 0.0);
    for pair in corr.windows(2) {
        d += pair[1] * pair[0].conj();
    }
    let phase_step = if d.norm_sqr() > 0.0 { d.arg() } else { 0.0 };
    let mut mean = Complex64::new(0.0, 0.0);
    for (i, u) in corr.iter().enumerate() {
        let b = (first_block + i) as f64;
        mean += u * Complex64::from_polar(1.0, -b * phase_step);
    }
    let phi0 = if mean.norm_sqr() > 0.0 { mean.arg() } else { 0.0 };
    // Initial offset (extrapolated back to block 0) and rate, in input
    // samples (per block).
    let tau0 = phi0 * rad_to_samples;
    let rate0 = phase_step * rad_to_samples;

    let mut pos = pos0 - tau0;
    let mut v = rate0; // integrator state (input samples per block)
    let mut correction = rate0; // kp·ε + v from the previous block
    let mut chips_x: Vec<Complex64> = Vec::new();
    let mut chips_y: Vec<Complex64> = Vec::new();
    let mut trace: Vec<f64> = Vec::new();
    let mut integrator: Vec<f64> = Vec::new();
    let mut saturated = 0usize;

    loop {
        if pos + span_per_block + 3.0 > n_in as f64 {
            break;
        }
        let block_idx = trace.len();
        trace.push(pos - (pos0 + block_idx as f64 * span_per_block));

        let step = sps as f64 - correction / cpb as f64;
        for (bx, by) in block_x.iter_mut().zip(block_y.iter_mut()) {
            *bx = interp(&wave.x, pos);
            *by = interp(&wave.y, pos);
            pos += step;
        }
        chips_x.extend_from_slice(&block_x);
        chips_y.extend_from_slice(&block_y);
        fft_forward(&mut block_x);
        fft_forward(&mut block_y);

        // Tone presence: compare the strongest bin near each nominal line
        // against the median bin power of the block. An uncompensated
        // carrier offset moves the lines off the exact bins (and spreads
        // them by leakage), so the check searches the detector window.
        let bin_power: Vec<f64> = (0..cpb)
            .map(|i| block_x[i].norm_sqr() + block_y[i].norm_sqr())
            .collect();
        let line_at = |center: usize| -> f64 {
            let lo = center.saturating_sub(cfg.half_window);
            let hi = (center + cfg.half_window).min(cpb - 1);
            bin_power[lo..=hi].iter().fold(0.0f64, |a, &b| a.max(b))
        };
        let line_power = 0.5 * (line_at(line_bin) + line_at(cpb - line_bin));
        let mut sorted = bin_power;
        sorted.sort_by(|a, b| a.total_cmp(b));
        let median = sorted[cpb / 2];
        if !(line_power > cfg.min_tone_ratio * median) {
            return Err(Error::TimingFailure(format!(
                "timing tones not detected in block {block_idx}: line-to-median power \
                 ratio {:.2} below {}",
                line_power / median.max(f64::MIN_POSITIVE),
                cfg.min_tone_ratio
            )));
        }

        let u = tone_correlation(&block_x, 1, k_div, cfg.half_window)?
            + tone_correlation(&block_y, 1, k_div, cfg.half_window)?;
        // arg(u) = 4π·τ/K on the chip stream; convert to input samples.
        let eps = u.im.atan2(u.re) * rad_to_samples;
        if !eps.is_finite() {
            return Err(Error::TimingFailure(format!(
                "timing detector returned a non-finite error in block {block_idx}"
            )));
        }
        if eps.abs() > 0.8 * eps_max {
            saturated += 1;
        }
        v += cfg.ki * eps;
        correction = cfg.kp * eps + v;
        integrator.push(v);
    }

    let blocks = trace.len();
    if blocks < min_blocks {
        return Err(Error::TimingFailure(format!(
            "timing loop produced only {blocks} blocks"
        )));
    }
    // Flush the tail shorter than one TED block at the last settled rate,
    // so the frame's final chips are not lost to the block grid.
    let step = sps as f64 - correction / cpb as f64;
    while pos + 2.0 <= n_in as f64 {
        chips_x.push(interp(&wave.x, pos));
        chips_y.push(interp(&wave.y, pos));
        pos += step;
    }
    if saturated * 2 > blocks {
        return Err(Error::TimingFailure(format!(
            "timing loop never locked: {saturated} of {blocks} blocks at the \
             detector limit"
        )));
    }
    // The integrator holds the rate correction the loop actually applies
    // (input samples per block); its settled mean is the rate offset.
    let settled = &integrator[blocks / 2..];
    let mean_v = settled.iter().sum::<f64>() / settled.len() as f64;
    let ppm_estimate = 1e6 * mean_v / span_per_block;
    Ok(TimingOutput {
        chips: DualPol::new(chips_x, chips_y)?,
        trace,
        ppm_estimate,
    })
}
