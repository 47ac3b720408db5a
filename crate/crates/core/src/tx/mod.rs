//! Transmitter: information bits → FEC → symbol mapping (QPSK or shaped
//! 16-QAM) → framing → multicarrier modulation → RRC shaping → timing-tone
//! insertion, for both polarizations.

pub mod frame;
pub mod map;
pub mod pcs;
pub mod rrc;
pub mod tone;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fec::LdpcCode;
use crate::transforms::{centering_shift, CompressionFactor, NofdmModulator};
use crate::waveform::DualPol;
use frame::{build_frame, generate_known_symbols, FrameLayout, KnownSymbols};
use pcs::Pcs16Shaper;

/// Which line format the link carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulationFormat {
    /// QPSK on spectrally compressed subcarriers.
    QpskNofdm,
    /// QPSK on orthogonal subcarriers (the compression factor must be 1).
    QpskOfdm,
    /// Probabilistically shaped 16-QAM on orthogonal subcarriers.
    Pcs16Ofdm,
}

impl std::fmt::Display for ModulationFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::QpskNofdm => "qpsk-nofdm",
            Self::QpskOfdm => "qpsk-ofdm",
            Self::Pcs16Ofdm => "pcs16-ofdm",
        })
    }
}

/// Everything the transmitter needs to know.
#[derive(Debug, Clone)]
pub struct TxParams {
    pub format: ModulationFormat,
    pub n_subcarriers: usize,
    pub compression: CompressionFactor,
    /// Target entropy for shaped 16-QAM (ignored by the QPSK formats).
    pub pcs_entropy: f64,
    pub baud: f64,
    pub sps: usize,
    pub rolloff: f64,
    pub rrc_span_symbols: usize,
    pub ts_symbols: usize,
    pub pilot_spacing: usize,
    pub tone_divisor: u32,
    pub tone_ratio_db: f64,
}

impl TxParams {
    fn validate(&self) -> Result<()> {
        if self.n_subcarriers == 0 {
            return Err(Error::InvalidConfig("need at least one subcarrier".into()));
        }
        if self.baud <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "baud rate must be positive, got {}",
                self.baud
            )));
        }
        if self.format != ModulationFormat::QpskNofdm && !self.compression.is_unity() {
            return Err(Error::InvalidConfig(format!(
                "{} requires orthogonal subcarriers (compression factor 1), got {}",
                self.format, self.compression
            )));
        }
        Ok(())
    }

    /// Sample rate of the emitted waveform.
    pub fn sample_rate(&self) -> f64 {
        self.baud * self.sps as f64
    }
}

/// The emitted waveform with its rates.
#[derive(Debug, Clone)]
pub struct TxWaveform {
    pub wave: DualPol,
    pub sample_rate: f64,
    pub baud: f64,
    pub sps: usize,
}

/// Transmitter output: the waveform plus the references the receiver and
/// the scorer need.
#[derive(Debug, Clone)]
pub struct TxOutput {
    pub waveform: TxWaveform,
    pub layout: FrameLayout,
    /// FEC-encoded bit stream per polarization.
    pub coded_bits: [Vec<u8>; 2],
    /// Subcarrier-domain payload grid per polarization.
    pub payload_grid: [Vec<Complex64>; 2],
    /// Known TS/pilot subcarrier values per polarization.
    pub known: [KnownSymbols; 2],
    /// The modulated (symbol-rate, pre-shaping) TS per polarization, used
    /// for synchronization correlation. Unnormalized scale.
    pub ts_time: [Vec<Complex64>; 2],
    /// FEC codewords per polarization.
    pub codewords: usize,
    /// The shaper, when the format is shaped 16-QAM.
    pub pcs: Option<Pcs16Shaper>,
}

/// Run the full transmit chain. `info` carries each polarization's
/// information bits (equal lengths, whole FEC blocks); `frame_rng` draws the
/// known TS and pilot content (X first, then Y, so the polarizations carry
/// distinct training data).
pub fn transmit<R: Rng>(
    params: &TxParams,
    code: &LdpcCode,
    info: [&[u8]; 2],
    frame_rng: &mut R,
) -> Result<TxOutput> {
    params.validate()?;
    if info[0].len() != info[1].len() {
        return Err(Error::InvalidConfig(format!(
            "polarizations must carry equal bit counts, got {} and {}",
            info[0].len(),
            info[1].len()
        )));
    }
    if info[0].is_empty() || info[0].len() % code.k() != 0 {
        return Err(Error::InvalidConfig(format!(
            "information stream of {} bits is not a whole number of {}-bit FEC blocks",
            info[0].len(),
            code.k()
        )));
    }
    let codewords = info[0].len() / code.k();
    let n = params.n_subcarriers;

    let pcs = match params.format {
        ModulationFormat::Pcs16Ofdm => Some(Pcs16Shaper::new(params.pcs_entropy)?),
        _ => None,
    };

    // Per-polarization: encode, map, frame, modulate.
    let mut coded_bits: [Vec<u8>; 2] = [Vec::new(), Vec::new()];
    let mut payload_grid: [Vec<Complex64>; 2] = [Vec::new(), Vec::new()];
    let mut known: [Option<KnownSymbols>; 2] = [None, None];
    let mut ts_time: [Vec<Complex64>; 2] = [Vec::new(), Vec::new()];
    let mut streams: [Vec<Complex64>; 2] = [Vec::new(), Vec::new()];
    let mut layout: Option<FrameLayout> = None;

    let modulator = NofdmModulator::new(n, params.compression)?;
    let shift = centering_shift(n, params.compression)?;
    let taps = rrc::rrc_taps(params.rolloff, params.sps, params.rrc_span_symbols)?;

    for pol in 0..2 {
        let mut coded = Vec::with_capacity(codewords * code.n());
        for block in info[pol].chunks_exact(code.k()) {
            coded.extend_from_slice(&code.encode(block)?);
        }
        let symbols = match &pcs {
            Some(shaper) => shaper.shape(&coded)?.0,
            None => map::map_qpsk(&coded)?,
        };
        if symbols.is_empty() || symbols.len() % n != 0 {
            return Err(Error::InvalidConfig(format!(
                "{} mapped symbols do not fill whole {n}-subcarrier symbols",
                symbols.len()
            )));
        }
        let this_layout = FrameLayout {
            ts_symbols: params.ts_symbols,
            pilot_spacing: params.pilot_spacing,
            payload_symbols: symbols.len() / n,
            tone_divisor: params.tone_divisor,
            tone_ratio_db: params.tone_ratio_db,
        };
        this_layout.validate()?;
        if let Some(prev) = &layout {
            debug_assert_eq!(prev, &this_layout);
        }
        let k = generate_known_symbols(&this_layout, n, frame_rng)?;
        let grid = build_frame(&symbols, &k, &this_layout, n)?;
        let mut stream = Vec::with_capacity(grid.len());
        for sym in grid.chunks_exact(n) {
            let mut block = modulator.modulate(sym)?;
            for (v, s) in block.iter_mut().zip(&shift) {
                *v *= s;
            }
            stream.extend_from_slice(&block);
        }
        ts_time[pol] = stream[..this_layout.ts_symbols * n].to_vec();
        coded_bits[pol] = coded;
        payload_grid[pol] = symbols;
        known[pol] = Some(k);
        streams[pol] = stream;
        layout = Some(this_layout);
    }
    let layout = layout.expect("two polarizations built");

    // Shape, normalize each polarization to unit mean power, add tones.
    let shaped_x = rrc::shape(&streams[0], &taps, params.sps);
    let shaped_y = rrc::shape(&streams[1], &taps, params.sps);
    let mut wave = DualPol::new(shaped_x, shaped_y)?;
    wave.for_each_pol(|pol| {
        let p = pol.iter().map(|v| v.norm_sqr()).sum::<f64>() / pol.len() as f64;
        if p > 0.0 {
            let g = 1.0 / p.sqrt();
            for v in pol.iter_mut() {
                *v *= g;
            }
        }
    });
    tone::insert_tones(
        &mut wave,
        params.sample_rate(),
        params.baud,
        params.tone_divisor,
        params.tone_ratio_db,
    )?;

    let [kx, ky] = known;
    Ok(TxOutput {
        waveform: TxWaveform {
            wave,
            sample_rate: params.sample_rate(),
            baud: params.baud,
            sps: params.sps,
        },
        layout,
        coded_bits,
        payload_grid,
        known: [kx.expect("built"), ky.expect("built")],
        ts_time,
        codewords,
        pcs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn params(format: ModulationFormat, cf: CompressionFactor) -> TxParams {
        TxParams {
            format,
            n_subcarriers: 8,
            compression: cf,
            pcs_entropy: 2.6,
            baud: 1.0,
            sps: 2,
            rolloff: 0.01,
            rrc_span_symbols: 128,
            ts_symbols: 64,
            pilot_spacing: 4,
            tone_divisor: 4,
            tone_ratio_db: 13.0,
        }
    }

    fn make_info(code: &LdpcCode, blocks: usize, seed: u64) -> Vec<u8> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..blocks * code.k()).map(|_| rng.random_range(0..2u8)).collect()
    }

    fn cf(b: u32, c: u32) -> CompressionFactor {
        CompressionFactor::new(b, c).unwrap()
    }

    #[test]
    fn test_waveform_geometry() {
        let code = LdpcCode::rate_5_6(9600).unwrap();
        let p = params(ModulationFormat::QpskNofdm, cf(7, 8));
        let info = make_info(&code, 1, 1);
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let out = transmit(&p, &code, [&info, &info], &mut rng).unwrap();
        // 9600 coded bits → 4800 QPSK symbols → 600 8-subcarrier symbols.
        assert_eq!(out.layout.payload_symbols, 600);
        assert_eq!(out.layout.pilot_count(), 150);
        let total = 64 + 600 + 150;
        assert_eq!(out.layout.total_symbols(), total);
        let expected_len = total * 8 * 2 + 257 - 1;
        assert_eq!(out.waveform.wave.x.len(), expected_len);
        assert_eq!(out.waveform.wave.y.len(), expected_len);
        assert_eq!(out.ts_time[0].len(), 64 * 8);
        assert_eq!(out.codewords, 1);
    }

    #[test]
    fn test_unit_power_before_tones() {
        let code = LdpcCode::rate_5_6(9600).unwrap();
        let mut p = params(ModulationFormat::QpskNofdm, cf(7, 8));
        p.tone_ratio_db = f64::INFINITY;
        let info = make_info(&code, 1, 3);
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let out = transmit(&p, &code, [&info, &info], &mut rng).unwrap();
        for pol in [&out.waveform.wave.x, &out.waveform.wave.y] {
            let power: f64 =
                pol.iter().map(|v| v.norm_sqr()).sum::<f64>() / pol.len() as f64;
            assert!((power - 1.0).abs() < 1e-12, "power {power}");
        }
    }

    #[test]
    fn test_tone_power_budget() {
        let code = LdpcCode::rate_5_6(9600).unwrap();
        let p = params(ModulationFormat::QpskNofdm, cf(7, 8));
        let info = make_info(&code, 1, 5);
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let out = transmit(&p, &code, [&info, &info], &mut rng).unwrap();
        let power: f64 = out.waveform.wave.x.iter().map(|v| v.norm_sqr()).sum::<f64>()
            / out.waveform.wave.x.len() as f64;
        // Unit signal power plus ~5% tones; the tone/signal cross term over
        // a non-integral number of tone periods leaves a small residual.
        assert!((power - 1.0501).abs() < 0.01, "power {power}");
    }

    #[test]
    fn test_polarizations_carry_distinct_training() {
        let code = LdpcCode::rate_5_6(9600).unwrap();
        let p = params(ModulationFormat::QpskNofdm, cf(7, 8));
        let info = make_info(&code, 1, 7);
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let out = transmit(&p, &code, [&info, &info], &mut rng).unwrap();
        assert_ne!(out.known[0].ts, out.known[1].ts);
        assert_ne!(out.ts_time[0], out.ts_time[1]);
    }

    #[test]
    fn test_qpsk_grid_matches_coded_bits() {
        let code = LdpcCode::rate_5_6(9600).unwrap();
        let p = params(ModulationFormat::QpskOfdm, cf(1, 1));
        let info = make_info(&code, 1, 9);
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        let out = transmit(&p, &code, [&info, &info], &mut rng).unwrap();
        let expected = map::map_qpsk(&out.coded_bits[0]).unwrap();
        assert_eq!(out.payload_grid[0], expected);
    }

    #[test]
    fn test_pcs_requires_orthogonal_subcarriers() {
        let code = LdpcCode::rate_5_6(9600).unwrap();
        let p = params(ModulationFormat::Pcs16Ofdm, cf(7, 8));
        let info = make_info(&code, 1, 11);
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        assert!(transmit(&p, &code, [&info, &info], &mut rng).is_err());
    }

    #[test]
    fn test_pcs_transmit_builds() {
        let code = LdpcCode::rate_5_6(9600).unwrap();
        let p = params(ModulationFormat::Pcs16Ofdm, cf(1, 1));
        let info = make_info(&code, 1, 13);
        let mut rng = ChaCha12Rng::seed_from_u64(14);
        let out = transmit(&p, &code, [&info, &info], &mut rng).unwrap();
        let shaper = out.pcs.as_ref().unwrap();
        // 9600 coded bits fill ⌈9600/bits_per_block⌉ matcher blocks.
        let blocks = 9600usize.div_ceil(shaper.bits_per_block());
        assert_eq!(
            out.layout.payload_symbols * 8,
            blocks * shaper.symbols_per_block()
        );
    }

    #[test]
    fn test_bit_stream_validation() {
        let code = LdpcCode::rate_5_6(9600).unwrap();
        let p = params(ModulationFormat::QpskNofdm, cf(7, 8));
        let mut rng = ChaCha12Rng::seed_from_u64(15);
        let short = vec![0u8; 100];
        assert!(transmit(&p, &code, [&short, &short], &mut rng).is_err());
        let a = make_info(&code, 1, 16);
        let b = make_info(&code, 2, 16);
        assert!(transmit(&p, &code, [&a, &b], &mut rng).is_err());
    }

    #[test]
    fn test_determinism() {
        let code = LdpcCode::rate_5_6(9600).unwrap();
        let p = params(ModulationFormat::QpskNofdm, cf(7, 8));
        let info = make_info(&code, 1, 17);
        let mut rng_a = ChaCha12Rng::seed_from_u64(18);
        let mut rng_b = ChaCha12Rng::seed_from_u64(18);
        let a = transmit(&p, &code, [&info, &info], &mut rng_a).unwrap();
        let b = transmit(&p, &code, [&info, &info], &mut rng_b).unwrap();
        assert_eq!(a.waveform.wave.x, b.waveform.wave.x);
        assert_eq!(a.waveform.wave.y, b.waveform.wave.y);
    }

    #[test]
    fn test_occupied_bandwidth_tracks_compression() {
        // The subcarrier comb narrows proportionally to α. Measured as the
        // smallest interval holding 90% of the power: the rectangular
        // block window leaves ~1.5% of the power in far 1/f² sidelobe
        // skirts whose extent is α-independent, so thresholds close to 1
        // measure the skirt floor rather than the comb.
        use crate::dsp::{fft_frequencies, power_spectrum};
        let code = LdpcCode::rate_5_6(9600).unwrap();
        let mut bws = Vec::new();
        for cf_pair in [(4, 5), (7, 8), (19, 20)] {
            let mut p = params(ModulationFormat::QpskNofdm, cf(cf_pair.0, cf_pair.1));
            p.tone_ratio_db = f64::INFINITY; // measure the signal alone
            let info = make_info(&code, 1, 19);
            let mut rng = ChaCha12Rng::seed_from_u64(20);
            let out = transmit(&p, &code, [&info, &info], &mut rng).unwrap();
            let seg = &out.waveform.wave.x[300..300 + 8192];
            let spec = power_spectrum(seg);
            let freqs = fft_frequencies(seg.len(), 2.0); // baud-normalized
            // Smallest frequency interval holding 90% of the power.
            let mut bins: Vec<(f64, f64)> = freqs.iter().copied().zip(spec).collect();
            bins.sort_by(|a, b| a.0.total_cmp(&b.0));
            let total: f64 = bins.iter().map(|b| b.1).sum();
            let target = 0.90 * total;
            let mut bw = f64::INFINITY;
            let mut acc = 0.0;
            let mut left = 0;
            for right in 0..bins.len() {
                acc += bins[right].1;
                while acc - bins[left].1 >= target {
                    acc -= bins[left].1;
                    left += 1;
                }
                if acc >= target {
                    bw = bw.min(bins[right].0 - bins[left].0);
                }
            }
            bws.push((cf_pair.0 as f64 / cf_pair.1 as f64, bw));
        }
        // Least-squares proportional fit BW = κ·α; every point must sit
        // within 3% of the fit.
        let kappa: f64 = bws.iter().map(|(a, b)| a * b).sum::<f64>()
            / bws.iter().map(|(a, _)| a * a).sum::<f64>();
        for (alpha, bw) in &bws {
            let rel = (bw - kappa * alpha).abs() / (kappa * alpha);
            assert!(rel < 0.03, "α={alpha}: bandwidth {bw} vs fit {}", kappa * alpha);
        }
    }
}
