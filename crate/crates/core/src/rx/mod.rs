//! The receiver: chromatic-dispersion compensation, matched filtering,
//! tone-aided timing recovery, frame synchronization with carrier-offset
//! estimation, adaptive 2×2 MIMO equalization with decision feedback from
//! the interference canceller, pilot-aided carrier phase recovery,
//! iterative interference cancellation, and FEC decoding — both the
//! conventional chain and the FEC-assisted cancellation pass.

pub mod cpr;
pub mod eq;
pub mod id;
pub mod metrics;
pub mod notch;
pub mod sync;
pub mod timing;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{compensate_cd, FiberSpec};
use crate::error::{Error, Result};
use crate::fec::{llr_qpsk, LdpcCode};
use crate::transforms::{
    centering_shift, InterferenceMatrix, NofdmDemodulator, NofdmModulator, OpCount,
};
use crate::tx::frame::{FrameLayout, KnownSymbols};
use crate::tx::map::{demap_qpsk, map_qpsk, nearest_qpsk};
use crate::tx::pcs::Pcs16Shaper;
use crate::tx::rrc::{matched_filter, rrc_taps};
use crate::tx::{ModulationFormat, TxOutput, TxParams};
use crate::waveform::DualPol;

pub use eq::EqualizerState;
pub use metrics::MetricsReport;
pub use timing::TimingConfig;

/// Channel-strength LLR magnitude used when the shaped format's coded bits
/// come from hard distribution-matcher decisions.
const HARD_BIT_LLR: f64 = 4.0;

/// Everything about the receiver that is a free choice (not dictated by
/// the transmitted signal's structure).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RxParams {
    /// Taps per equalizer branch (odd).
    pub eq_span: usize,
    /// LMS step size during data-aided training on the TS.
    pub mu_train: f64,
    /// LMS step size for the decision-directed payload pass.
    pub mu_dd: f64,
    /// Passes over the TS during training.
    pub train_epochs: usize,
    /// Interference-cancellation iterations M.
    pub id_iterations: usize,
    /// Which cancellation iteration feeds the equalizer's decisions.
    pub feedback_iteration: usize,
    /// Total FEC iteration budget per codeword.
    pub ldpc_budget: usize,
    /// Iterations granted to the early FEC pass that assists cancellation.
    pub ldpc_segment_iters: usize,
    /// Pole radius of the tone-removal notch.
    pub notch_r0: f64,
    /// Pilot coherence below this flags the phase track as unreliable.
    pub cpr_min_confidence: f64,
    /// Timing-recovery loop settings.
    pub timing: TimingConfig,
}

impl Default for RxParams {
    fn default() -> Self {
        Self {
            eq_span: 25,
            mu_train: 1e-3,
            mu_dd: 1e-4,
            train_epochs: 8,
            id_iterations: 5,
            feedback_iteration: 3,
            ldpc_budget: 50,
            ldpc_segment_iters: 25,
            notch_r0: 0.985,
            cpr_min_confidence: 0.3,
            timing: TimingConfig::default(),
        }
    }
}

impl RxParams {
    pub fn validate(&self) -> Result<()> {
        if self.eq_span == 0 || self.eq_span % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "equalizer span must be odd, got {}",
                self.eq_span
            )));
        }
        for (name, mu) in [("training", self.mu_train), ("decision-directed", self.mu_dd)] {
            if !(mu.is_finite() && mu > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} step size must be positive and finite, got {mu}"
                )));
            }
        }
        if self.train_epochs == 0 {
            return Err(Error::InvalidConfig(
                "training needs at least one epoch".into(),
            ));
        }
        if self.id_iterations == 0 {
            return Err(Error::InvalidConfig(
                "interference cancellation needs at least one iteration".into(),
            ));
        }
        if self.feedback_iteration == 0 || self.feedback_iteration > self.id_iterations {
            return Err(Error::InvalidConfig(format!(
                "feedback iteration {} must lie in 1..={}",
                self.feedback_iteration, self.id_iterations
            )));
        }
        if self.ldpc_segment_iters == 0 || self.ldpc_segment_iters >= self.ldpc_budget {
            return Err(Error::InvalidConfig(format!(
                "the early FEC pass ({} iterations) must leave part of the budget ({}) \
                 for the final decode",
                self.ldpc_segment_iters, self.ldpc_budget
            )));
        }
        if !(0.0..=1.0).contains(&self.cpr_min_confidence) {
            return Err(Error::InvalidConfig(format!(
                "pilot confidence threshold must lie in [0, 1], got {}",
                self.cpr_min_confidence
            )));
        }
        Ok(())
    }
}

/// What the receiver legitimately knows about the link: the transmit
/// configuration, the frame geometry, the known TS/pilot content, the
/// fiber it compensates, and the code it decodes.
#[derive(Debug, Clone, Copy)]
pub struct RxSideInfo<'a> {
    pub tx: &'a TxParams,
    pub layout: &'a FrameLayout,
    pub known: &'a [KnownSymbols; 2],
    pub ts_time: &'a [Vec<Complex64>; 2],
    pub fiber: &'a FiberSpec,
    pub code: &'a LdpcCode,
    pub pcs: Option<&'a Pcs16Shaper>,
}

impl<'a> RxSideInfo<'a> {
    /// Wire the side information straight from a transmitter run.
    pub fn from_tx(
        tx: &'a TxParams,
        out: &'a TxOutput,
        fiber: &'a FiberSpec,
        code: &'a LdpcCode,
    ) -> Self {
        Self {
            tx,
            layout: &out.layout,
            known: &out.known,
            ts_time: &out.ts_time,
            fiber,
            code,
            pcs: out.pcs.as_ref(),
        }
    }
}

/// Everything the receiver recovered from one waveform.
#[derive(Debug, Clone)]
pub struct RxOutput {
    /// Hard pre-FEC decisions on the coded bit stream, per polarization.
    pub coded_bits: [Vec<u8>; 2],
    /// Decoded information bits (conventional chain), per polarization.
    pub info_bits: [Vec<u8>; 2],
    /// Decoded information bits of the FEC-assisted cancellation chain;
    /// populated only for the compressed-subcarrier format.
    pub info_bits_assisted: Option<[Vec<u8>; 2]>,
    /// Final payload symbol stream after cancellation, per polarization.
    pub payload_symbols: [Vec<Complex64>; 2],
    /// Coarse carrier-offset estimate from the TS halves, Hz.
    pub cfo_estimate_hz: f64,
    /// Residual carrier offset from the pilot phase ramp, Hz.
    pub residual_cfo_hz: f64,
    /// Clock-rate offset estimate from the timing loop, ppm.
    pub clock_ppm_estimate: f64,
    /// Timing-loop position trace (input samples per block).
    pub timing_trace: Vec<f64>,
    /// The converged equalizer.
    pub equalizer: EqualizerState,
    /// True when the pilots were too noisy to trust the phase track.
    pub cpr_low_confidence: bool,
    /// Cost of demodulating one multicarrier block in this configuration.
    pub demod_ops: Option<OpCount>,
}

/// Run the full receive chain on one captured waveform.
pub fn receive(
    wave: &DualPol,
    sample_rate: f64,
    side: &RxSideInfo<'_>,
    params: &RxParams,
) -> Result<RxOutput> {
    params.validate()?;
    let tx = side.tx;
    let layout = side.layout;
    let n = tx.n_subcarriers;
    if tx.sps < 2 {
        return Err(Error::InvalidConfig(format!(
            "the receiver needs an oversampled waveform (sps >= 2), got {}",
            tx.sps
        )));
    }
    let expected_fs = tx.sample_rate();
    if !(sample_rate.is_finite() && (sample_rate - expected_fs).abs() < 1e-6 * expected_fs) {
        return Err(Error::InvalidConfig(format!(
            "waveform sampled at {sample_rate} Sa/s, but the configuration implies \
             {expected_fs} Sa/s"
        )));
    }
    let ts_chips = layout.ts_symbols * n;
    for pol in side.ts_time {
        if pol.len() != ts_chips {
            return Err(Error::SizeMismatch {
                context: "TS chip reference",
                expected: ts_chips,
                actual: pol.len(),
            });
        }
    }
    let pilot_count = layout.pilot_count();
    for k in side.known {
        if k.ts.len() != layout.ts_symbols * n || k.pilots.len() != pilot_count * n {
            return Err(Error::SizeMismatch {
                context: "known TS/pilot grid",
                expected: layout.ts_symbols * n + pilot_count * n,
                actual: k.ts.len() + k.pilots.len(),
            });
        }
    }
    if tx.format == ModulationFormat::Pcs16Ofdm && side.pcs.is_none() {
        return Err(Error::InvalidConfig(
            "the shaped 16-QAM format needs its distribution matcher".into(),
        ));
    }

    // ── Linear front end ────────────────────────────────────────────────
    let mut front = wave.clone();
    compensate_cd(&mut front, sample_rate, side.fiber)?;
    let taps = rrc_taps(tx.rolloff, tx.sps, tx.rrc_span_symbols)?;
    let mut front = DualPol::new(
        matched_filter(&front.x, &taps),
        matched_filter(&front.y, &taps),
    )?;

    // ── Chip-rate recovery ──────────────────────────────────────────────
    let tones_present = tx.tone_ratio_db.is_finite();
    let mut cfo_coarse = 0.0;
    let (mut chips, timing_trace, clock_ppm_estimate) = if tones_present {
        // Knock the bulk of the carrier offset down first, from the tone
        // pair itself: with the tones back on their nominal frequencies the
        // phase detector stays clean and the notches land on the lines.
        let fs = sample_rate;
        cfo_coarse = timing::tone_cfo_estimate(&front, fs, tx.baud, tx.tone_divisor)?;
        if let Some(v) = std::env::var_os("NOFDM_DBG_CFO") {
            cfo_coarse = v.to_string_lossy().parse().unwrap();
        }
        let w = std::f64::consts::TAU * cfo_coarse / fs;
        front.for_each_pol(|pol| {
            for (i, v) in pol.iter_mut().enumerate() {
                *v *= Complex64::from_polar(1.0, -w * i as f64);
            }
        });
        let mut tcfg = params.timing.clone();
        tcfg.tone_divisor = tx.tone_divisor;
        let out = timing::timing_recovery(&front, tx.sps, &tcfg)?;
        (out.chips, out.trace, out.ppm_estimate)
    } else {
        // Without tones there is nothing to lock to: decimate on the
        // nominal grid and assume the clocks are already aligned.
        let x: Vec<Complex64> = front.x.iter().step_by(tx.sps).copied().collect();
        let y: Vec<Complex64> = front.y.iter().step_by(tx.sps).copied().collect();
        (DualPol::new(x, y)?, Vec::new(), 0.0)
    };
    drop(front);
    if tones_present {
        let theta = std::f64::consts::TAU / tx.tone_divisor as f64;
        notch::notch_filter(&mut chips.x, theta, params.notch_r0)?;
        notch::notch_filter(&mut chips.y, theta, params.notch_r0)?;
    }

    // ── Frame synchronization and carrier-offset removal ────────────────
    let sr = sync::frame_sync(&chips, tx.baud, side.ts_time)?;
    if std::env::var_os("NOFDM_DBG_SYNC").is_some() {
        eprintln!(
            "frame_sync: start={} cfo={:+.2}MHz (coarse {:+.2}MHz)",
            sr.frame_start,
            sr.cfo_hz / 1e6,
            cfo_coarse / 1e6
        );
    }
    let cfo_estimate_hz = cfo_coarse + sr.cfo_hz;
    let w_cfo = std::f64::consts::TAU * sr.cfo_hz / tx.baud;
    chips.for_each_pol(|pol| {
        for (i, v) in pol.iter_mut().enumerate() {
            *v *= Complex64::from_polar(1.0, -w_cfo * i as f64);
        }
    });
    let frame_start = sr.frame_start;
    let total = layout.total_symbols();
    if frame_start + total * n + params.eq_span / 2 > chips.len() {
        return Err(Error::SyncFailure(format!(
            "frame of {total} symbols starting at chip {frame_start} does not fit the \
             {}-chip stream",
            chips.len()
        )));
    }

    // ── Transform machinery ─────────────────────────────────────────────
    let cf = tx.compression;
    let modulator = NofdmModulator::new(n, cf)?;
    let demodulator = NofdmDemodulator::new(n, cf)?;
    let shift = centering_shift(n, cf)?;
    let cmat = InterferenceMatrix::new(n, cf)?;
    let orthogonal = cf.is_unity();
    let demod_block = |block: &[Complex64]| -> Result<Vec<Complex64>> {
        let unshifted: Vec<Complex64> = block
            .iter()
            .zip(&shift)
            .map(|(c, s)| c * s.conj())
            .collect();
        demodulator.demodulate(&unshifted)
    };
    let remod_block = |symbols: &[Complex64]| -> Result<Vec<Complex64>> {
        Ok(modulator
            .modulate(symbols)?
            .iter()
            .zip(&shift)
            .map(|(c, s)| c * s)
            .collect())
    };
    let shaper = side.pcs;
    let decide = move |v: Complex64| -> Complex64 {
        match (tx.format, shaper) {
            (ModulationFormat::Pcs16Ofdm, Some(s)) => s.nearest_point(v),
            _ => nearest_qpsk(v),
        }
    };

    // ── Equalizer training on the TS ────────────────────────────────────
    let mut state = eq::EqualizerState::center_spike(params.eq_span, params.mu_train)?;
    for _ in 0..params.train_epochs {
        for i in 0..ts_chips {
            let at = frame_start + i;
            let (px, py) = state.output_at(&chips.x, &chips.y, at);
            let ex = side.ts_time[0][i] - px;
            let ey = side.ts_time[1][i] - py;
            state.update_at(&chips.x, &chips.y, at, ex, ey);
        }
    }

    // ── Adaptation pass: pilot-held phase, decision feedback from the
    //    canceller's chosen iteration ───────────────────────────────────
    state.mu = params.mu_dd;
    let group = layout.pilot_spacing + 1;
    let mut theta_track = 0.0;
    for g in layout.ts_symbols..total {
        let idx = g - layout.ts_symbols;
        let base = frame_start + g * n;
        let mut bx = Vec::with_capacity(n);
        let mut by = Vec::with_capacity(n);
        for k in 0..n {
            let (px, py) = state.output_at(&chips.x, &chips.y, base + k);
            bx.push(px);
            by.push(py);
        }
        let rot = Complex64::from_polar(1.0, -theta_track);
        let qx: Vec<Complex64> = bx.iter().map(|v| v * rot).collect();
        let qy: Vec<Complex64> = by.iter().map(|v| v * rot).collect();
        if idx % group == 0 {
            // Pilot: advance the common carrier phase.
            let pi = idx / group;
            let rx_p = demod_block(&qx)?;
            let ry_p = demod_block(&qy)?;
            let kx = &side.known[0].pilots[pi * n..(pi + 1) * n];
            let ky = &side.known[1].pilots[pi * n..(pi + 1) * n];
            let mut corr = Complex64::new(0.0, 0.0);
            for k in 0..n {
                corr += rx_p[k] * kx[k].conj() + ry_p[k] * ky[k].conj();
            }
            theta_track += corr.im.atan2(corr.re);
        } else {
            // Payload: cancellation feedback drives the taps.
            state.theta = theta_track;
            let pdx = demod_block(&qx)?;
            let pdy = demod_block(&qy)?;
            let (sx, sy) = if orthogonal {
                (pdx, pdy)
            } else {
                let ix = id::conventional_id(&pdx, &cmat, params.id_iterations)?;
                let iy = id::conventional_id(&pdy, &cmat, params.id_iterations)?;
                let m = params.feedback_iteration - 1;
                (ix[m].clone(), iy[m].clone())
            };
            let ex_sym: Vec<Complex64> = sx.iter().map(|&v| decide(v) - v).collect();
            let ey_sym: Vec<Complex64> = sy.iter().map(|&v| decide(v) - v).collect();
            let ex_chips = remod_block(&ex_sym)?;
            let ey_chips = remod_block(&ey_sym)?;
            for k in 0..n {
                state.update_at(&chips.x, &chips.y, base + k, ex_chips[k], ey_chips[k]);
            }
        }
    }

    // ── Output pass: frozen taps, full pilot phase track, payload
    //    demodulation under the interpolated phase ──────────────────────
    let mut rxp_x = Vec::with_capacity(pilot_count * n);
    let mut rxp_y = Vec::with_capacity(pilot_count * n);
    for pi in 0..pilot_count {
        let g = layout.ts_symbols + pi * group;
        let base = frame_start + g * n;
        let mut bx = Vec::with_capacity(n);
        let mut by = Vec::with_capacity(n);
        for k in 0..n {
            let (px, py) = state.output_at(&chips.x, &chips.y, base + k);
            bx.push(px);
            by.push(py);
        }
        rxp_x.extend(demod_block(&bx)?);
        rxp_y.extend(demod_block(&by)?);
    }
    let track = cpr::pilot_phase_track(
        &rxp_x,
        &side.known[0].pilots,
        &rxp_y,
        &side.known[1].pilots,
        n,
        group as f64,
        n as f64 / tx.baud,
        params.cpr_min_confidence,
    )?;

    let payload_len = layout.payload_symbols * n;
    let mut p_x = Vec::with_capacity(payload_len);
    let mut p_y = Vec::with_capacity(payload_len);
    for g in layout.ts_symbols..total {
        let idx = g - layout.ts_symbols;
        if idx % group == 0 {
            continue;
        }
        let base = frame_start + g * n;
        let theta = cpr::interpolate_phase(&track.phases, group as f64, idx as f64);
        let rot = Complex64::from_polar(1.0, -theta);
        let mut bx = Vec::with_capacity(n);
        let mut by = Vec::with_capacity(n);
        for k in 0..n {
            let (px, py) = state.output_at(&chips.x, &chips.y, base + k);
            bx.push(px * rot);
            by.push(py * rot);
        }
        p_x.extend(demod_block(&bx)?);
        p_y.extend(demod_block(&by)?);
    }

    let cancel_stream = |p: &[Complex64]| -> Result<Vec<Complex64>> {
        if orthogonal {
            return Ok(p.to_vec());
        }
        let mut out = Vec::with_capacity(p.len());
        for block in p.chunks_exact(n) {
            let iters = id::conventional_id(block, &cmat, params.id_iterations)?;
            out.extend_from_slice(&iters[params.id_iterations - 1]);
        }
        Ok(out)
    };
    let s_x = cancel_stream(&p_x)?;
    let s_y = cancel_stream(&p_y)?;

    // ── Decisions and FEC ───────────────────────────────────────────────
    let code = side.code;
    let nn = code.n();
    let coded_bits: [Vec<u8>; 2] = match tx.format {
        ModulationFormat::Pcs16Ofdm => {
            let s = shaper.expect("validated above");
            // The matcher pads the coded stream to whole shaping blocks;
            // drop the tail past the last whole codeword.
            let mut streams = [s.unshape(&s_x)?, s.unshape(&s_y)?];
            for bits in &mut streams {
                bits.truncate(bits.len() / nn * nn);
            }
            streams
        }
        _ => [demap_qpsk(&s_x), demap_qpsk(&s_y)],
    };
    for bits in &coded_bits {
        if bits.is_empty() || bits.len() % nn != 0 {
            return Err(Error::SizeMismatch {
                context: "coded bit stream vs FEC block length",
                expected: nn,
                actual: bits.len(),
            });
        }
    }

    let noise_var = |s: &[Complex64]| -> f64 {
        let v = s.iter().map(|&v| (v - nearest_qpsk(v)).norm_sqr()).sum::<f64>()
            / s.len() as f64;
        v.max(1e-9)
    };

    let mut info_bits: [Vec<u8>; 2] = [Vec::new(), Vec::new()];
    for (pol, out) in info_bits.iter_mut().enumerate() {
        match tx.format {
            ModulationFormat::Pcs16Ofdm => {
                for chunk in coded_bits[pol].chunks_exact(nn) {
                    let llr: Vec<f64> = chunk
                        .iter()
                        .map(|&b| (1.0 - 2.0 * b as f64) * HARD_BIT_LLR)
                        .collect();
                    let res = code.decode(&llr, params.ldpc_budget)?;
                    out.extend_from_slice(code.info_bits(&res.bits));
                }
            }
            _ => {
                let stream = if pol == 0 { &s_x } else { &s_y };
                for chunk in stream.chunks_exact(nn / 2) {
                    let llr = llr_qpsk(chunk, noise_var(chunk))?;
                    let res = code.decode(&llr, params.ldpc_budget)?;
                    out.extend_from_slice(code.info_bits(&res.bits));
                }
            }
        }
    }

    let info_bits_assisted = if tx.format == ModulationFormat::QpskNofdm {
        let mut assisted: [Vec<u8>; 2] = [Vec::new(), Vec::new()];
        for (pol, out) in assisted.iter_mut().enumerate() {
            let (s_stream, p_stream) = if pol == 0 { (&s_x, &p_x) } else { (&s_y, &p_y) };
            let sym_cw = nn / 2;
            for (ci, chunk) in s_stream.chunks_exact(sym_cw).enumerate() {
                // Early partial decode on the conventional output…
                let llr = llr_qpsk(chunk, noise_var(chunk))?;
                let early = code.segment_decode(&llr, params.ldpc_segment_iters, params.ldpc_budget)?;
                // …its re-mapped codeword cleans one more cancellation
                // pass against the raw demodulated blocks…
                let clean = map_qpsk(&early.bits)?;
                let p_cw = &p_stream[ci * sym_cw..(ci + 1) * sym_cw];
                let mut s2 = Vec::with_capacity(sym_cw);
                for (pb, cb) in p_cw.chunks_exact(n).zip(clean.chunks_exact(n)) {
                    s2.extend(id::cancel_with_decisions(pb, &cmat, cb)?);
                }
                // …and the remaining budget decodes the cleaned symbols.
                let llr2 = llr_qpsk(&s2, noise_var(&s2))?;
                let fin = code.decode(&llr2, params.ldpc_budget - params.ldpc_segment_iters)?;
                out.extend_from_slice(code.info_bits(&fin.bits));
            }
        }
        Some(assisted)
    } else {
        None
    };

    Ok(RxOutput {
        coded_bits,
        info_bits,
        info_bits_assisted,
        payload_symbols: [s_x, s_y],
        cfo_estimate_hz,
        residual_cfo_hz: track.residual_cfo_hz,
        clock_ppm_estimate,
        timing_trace,
        equalizer: state,
        cpr_low_confidence: track.low_confidence,
        demod_ops: demodulator.op_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::apply_cd;
    use crate::waveform::relative_l2_distance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn test_partial_dispersion_compensation_leaves_one_span() {
        // Compensating 19 of 20 spans must leave exactly one span's
        // quadratic phase — the same waveform as dispersing one span.
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let n = 4096;
        let mut wave = DualPol::new(
            (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
            (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap();
        let fs = 227.5e9;
        let spans = |count: usize| FiberSpec {
            span_count: count,
            ..FiberSpec::default()
        };
        let mut residual = wave.clone();
        apply_cd(&mut residual, fs, &spans(1)).unwrap();
        apply_cd(&mut wave, fs, &spans(20)).unwrap();
        compensate_cd(&mut wave, fs, &spans(19)).unwrap();
        assert!(relative_l2_distance(&wave.x, &residual.x) < 1e-9);
        assert!(relative_l2_distance(&wave.y, &residual.y) < 1e-9);
    }

    #[test]
    fn test_params_validation() {
        assert!(RxParams::default().validate().is_ok());
        let bad = |f: &dyn Fn(&mut RxParams)| {
            let mut p = RxParams::default();
            f(&mut p);
            p.validate().is_err()
        };
        assert!(bad(&|p| p.eq_span = 24));
        assert!(bad(&|p| p.eq_span = 0));
        assert!(bad(&|p| p.mu_train = 0.0));
        assert!(bad(&|p| p.mu_dd = f64::NAN));
        assert!(bad(&|p| p.train_epochs = 0));
        assert!(bad(&|p| p.id_iterations = 0));
        assert!(bad(&|p| p.feedback_iteration = 0));
        assert!(bad(&|p| p.feedback_iteration = 6));
        assert!(bad(&|p| p.ldpc_segment_iters = 50));
        assert!(bad(&|p| p.ldpc_segment_iters = 0));
        assert!(bad(&|p| p.cpr_min_confidence = 1.5));
    }

    #[test]
    fn test_params_serde_round_trip() {
        let params = RxParams::default();
        let toml = toml::to_string(&params).unwrap();
        let back: RxParams = toml::from_str(&toml).unwrap();
        assert_eq!(back.eq_span, params.eq_span);
        assert_eq!(back.timing.block_chips, params.timing.block_chips);
        // Partial configs fall back to defaults field by field.
        let partial: RxParams = toml::from_str("eq_span = 11\n").unwrap();
        assert_eq!(partial.eq_span, 11);
        assert_eq!(partial.train_epochs, RxParams::default().train_epochs);
    }
}
