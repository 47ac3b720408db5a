//! End-to-end execution of one scenario and raw-waveform dumps.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::channel::apply_channel;
use crate::error::{Error, Result};
use crate::fec::LdpcCode;
use crate::rx::metrics::{ber, per_subcarrier_ber, qpsk_label, MetricsReport};
use crate::rx::{receive, RxOutput, RxSideInfo};
use crate::scenario::{derive_seed, ScenarioConfig};
use crate::tx::pcs::Pcs16Shaper;
use crate::tx::{transmit, ModulationFormat, TxOutput};
use crate::waveform::DualPol;

/// Everything produced by one scenario execution: the condensed metrics
/// plus the raw transmitter/receiver state for inspection or dumping.
#[derive(Debug)]
pub struct ScenarioRun {
    /// Condensed result quoted in reports and sweep rows.
    pub report: MetricsReport,
    /// Full receiver output (decisions, estimates, traces).
    pub rx: RxOutput,
    /// Full transmitter output (reference bits, grids, waveform).
    pub tx: TxOutput,
    /// The waveform as it arrived at the receiver, after all channel
    /// impairments.
    pub received_wave: DualPol,
}

/// Runs transmit → channel → receive for one configuration and gathers
/// the metrics.
///
/// Payload bits, frame symbols, and channel noise each draw from an RNG
/// derived from `cfg.seed`, so the result is a pure function of the
/// configuration.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioRun> {
    cfg.validate()?;
    let digest = cfg.digest();
    let code = LdpcCode::rate_5_6(cfg.fec_block_bits).map_err(|e| e.in_stage("fec"))?;
    let codewords = cfg.info_bits_per_pol.div_ceil(code.k());

    let mut info_rng = ChaCha12Rng::seed_from_u64(derive_seed(cfg.seed, 0, "info"));
    let mut draw = |n: usize| -> Vec<u8> {
        (0..n).map(|_| info_rng.random_range(0..2u8)).collect()
    };
    let info_x = draw(codewords * code.k());
    let info_y = draw(codewords * code.k());

    let mut frame_rng = ChaCha12Rng::seed_from_u64(derive_seed(cfg.seed, 0, "frame"));
    let tx = transmit(&cfg.tx_params(), &code, [&info_x, &info_y], &mut frame_rng)
        .map_err(|e| e.in_stage("tx"))?;

    let mut wave = tx.waveform.wave.clone();
    let mut channel = cfg.channel.clone();
    channel.impairments.seed = derive_seed(cfg.seed, 0, "channel");
    apply_channel(&mut wave, tx.waveform.sample_rate, &channel).map_err(|e| e.in_stage("channel"))?;

    let tx_params = cfg.tx_params();
    let side = RxSideInfo::from_tx(&tx_params, &tx, &cfg.channel.fiber, &code);
    let rx = receive(&wave, tx.waveform.sample_rate, &side, &cfg.rx).map_err(|e| e.in_stage("rx"))?;

    let report = build_report(cfg, &tx, &rx, [&info_x, &info_y], digest)?;
    Ok(ScenarioRun {
        report,
        rx,
        tx,
        received_wave: wave,
    })
}

fn build_report(
    cfg: &ScenarioConfig,
    tx: &TxOutput,
    rx: &RxOutput,
    info: [&[u8]; 2],
    digest: String,
) -> Result<MetricsReport> {
    let concat = |pair: &[Vec<u8>; 2]| -> Vec<u8> {
        let mut v = pair[0].clone();
        v.extend_from_slice(&pair[1]);
        v
    };
    let tx_coded = concat(&tx.coded_bits);
    let rx_coded = concat(&rx.coded_bits);
    let pre_fec_ber = ber(&rx_coded, &tx_coded)?;

    let mut info_ref = info[0].to_vec();
    info_ref.extend_from_slice(info[1]);
    let post_fec_ber = ber(&concat(&rx.info_bits), &info_ref)?;
    let post_fec_ber_assisted = match &rx.info_bits_assisted {
        Some(bits) => Some(ber(&concat(bits), &info_ref)?),
        None => None,
    };

    let mut rx_payload = rx.payload_symbols[0].clone();
    rx_payload.extend_from_slice(&rx.payload_symbols[1]);
    let mut tx_payload = tx.payload_grid[0].clone();
    tx_payload.extend_from_slice(&tx.payload_grid[1]);
    let per_sc = match cfg.format {
        ModulationFormat::Pcs16Ofdm => {
            let shaper = tx
                .pcs
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("shaped format without a shaper".into()))?;
            let label = pcs16_label(shaper);
            per_subcarrier_ber(&rx_payload, &tx_payload, cfg.n_subcarriers, 4, label)?
        }
        _ => per_subcarrier_ber(&rx_payload, &tx_payload, cfg.n_subcarriers, 2, qpsk_label)?,
    };

    Ok(MetricsReport {
        format: cfg.format.to_string(),
        compression: cfg.compression.to_string(),
        pre_fec_ber,
        post_fec_ber,
        post_fec_ber_assisted,
        per_subcarrier_ber: per_sc,
        cfo_estimate_hz: rx.cfo_estimate_hz,
        residual_cfo_hz: rx.residual_cfo_hz,
        clock_ppm_estimate: rx.clock_ppm_estimate,
        demod_complex_mults: rx.demod_ops.map(|c| c.complex_mults as u64),
        demod_complex_adds: rx.demod_ops.map(|c| c.complex_adds as u64),
        seed: cfg.seed,
        config_digest: digest,
    })
}

/// Gray bit label for a shaped-16QAM decision: two Gray-coded bits per
/// I/Q axis, so per-subcarrier error attribution counts single-axis,
/// single-step decision errors as one bit.
fn pcs16_label(shaper: &Pcs16Shaper) -> impl Fn(Complex64) -> u32 + '_ {
    const GRAY: [u32; 4] = [0b00, 0b01, 0b11, 0b10];
    let points = shaper.constellation();
    move |v: Complex64| {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (idx, p) in points.iter().enumerate() {
            let d = (v - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = idx;
            }
        }
        (GRAY[best / 4] << 2) | GRAY[best % 4]
    }
}

#[derive(Serialize)]
struct DumpSidecar {
    file: String,
    encoding: &'static str,
    layout: &'static str,
    samples: usize,
    sample_rate_hz: f64,
}

/// Writes a dual-polarization waveform as raw little-endian f64 samples
/// (`x_re, x_im, y_re, y_im` per time step) plus a JSON sidecar that
/// records the layout and rates. Returns the path of the raw file.
pub fn dump_waveform(
    dir: &Path,
    name: &str,
    wave: &DualPol,
    sample_rate: f64,
) -> Result<PathBuf> {
    let mut buf = Vec::with_capacity(wave.x.len() * 32);
    for (xs, ys) in wave.x.iter().zip(&wave.y) {
        buf.extend_from_slice(&xs.re.to_le_bytes());
        buf.extend_from_slice(&xs.im.to_le_bytes());
        buf.extend_from_slice(&ys.re.to_le_bytes());
        buf.extend_from_slice(&ys.im.to_le_bytes());
    }
    let raw_path = dir.join(format!("{name}.iq"));
    fs::write(&raw_path, &buf)?;

    let sidecar = DumpSidecar {
        file: format!("{name}.iq"),
        encoding: "f64-le",
        layout: "interleaved x_re, x_im, y_re, y_im",
        samples: wave.x.len(),
        sample_rate_hz: sample_rate,
    };
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Error::Parse(format!("sidecar serialization: {e}")))?;
    fs::write(dir.join(format!("{name}.json")), json)?;
    Ok(raw_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.info_bits_per_pol = 8000; // one codeword
        cfg.channel.impairments.osnr_db = 22.0;
        cfg.channel.impairments.cfo_hz = 50.0e6;
        cfg.channel.impairments.linewidth_hz = 30.0e3;
        cfg.seed = 11;
        cfg
    }

    #[test]
    fn test_quick_scenario_decodes_cleanly() {
        let run = run_scenario(&quick_config()).unwrap();
        let r = &run.report;
        assert_eq!(r.format, "qpsk-nofdm");
        assert_eq!(r.compression, "7/8");
        assert!(r.pre_fec_ber < 0.05, "pre-FEC BER {}", r.pre_fec_ber);
        assert_eq!(r.post_fec_ber, 0.0);
        assert_eq!(r.post_fec_ber_assisted, Some(0.0));
        assert_eq!(r.per_subcarrier_ber.len(), 8);
        assert!((r.cfo_estimate_hz + r.residual_cfo_hz - 50.0e6).abs() < 10.0e6);
        assert!(r.demod_complex_mults.is_some());
        assert_eq!(r.seed, 11);
        assert_eq!(r.config_digest, quick_config().digest());
    }

    #[test]
    fn test_reports_are_byte_identical_across_runs() {
        let a = serde_json::to_string(&run_scenario(&quick_config()).unwrap().report).unwrap();
        let b = serde_json::to_string(&run_scenario(&quick_config()).unwrap().report).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn test_seed_changes_channel_noise_but_not_digest_fields() {
        let mut cfg = quick_config();
        cfg.seed = 12;
        let run = run_scenario(&cfg).unwrap();
        let base = run_scenario(&quick_config()).unwrap();
        // Different seed, same settings: the realized BER differs but the
        // schema-level fields agree.
        assert_ne!(
            serde_json::to_string(&run.report).unwrap(),
            serde_json::to_string(&base.report).unwrap()
        );
        assert_eq!(run.report.format, base.report.format);
        assert_eq!(run.report.per_subcarrier_ber.len(), 8);
    }

    #[test]
    fn test_pcs16_label_gray_property() {
        let shaper = Pcs16Shaper::new(2.6).unwrap();
        let label = pcs16_label(&shaper);
        let points = shaper.constellation();
        // Horizontally or vertically adjacent constellation points must
        // differ in exactly one bit.
        for i in 0..4 {
            for q in 0..4 {
                let here = label(points[i * 4 + q]);
                if i + 1 < 4 {
                    let right = label(points[(i + 1) * 4 + q]);
                    assert_eq!((here ^ right).count_ones(), 1);
                }
                if q + 1 < 4 {
                    let up = label(points[i * 4 + q + 1]);
                    assert_eq!((here ^ up).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn test_waveform_dump_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let wave = DualPol {
            x: vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.25)],
            y: vec![Complex64::new(-1.0, 0.0), Complex64::new(3.0, 4.0)],
        };
        let path = dump_waveform(dir.path(), "probe", &wave, 260.0e9).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 2 * 4 * 8);
        let first = f64::from_le_bytes(bytes[0..8].try_into().unwrap());
        assert_eq!(first, 1.0);
        let y_im_last = f64::from_le_bytes(bytes[56..64].try_into().unwrap());
        assert_eq!(y_im_last, 4.0);
        let sidecar: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("probe.json")).unwrap())
                .unwrap();
        assert_eq!(sidecar["samples"], 2);
        assert_eq!(sidecar["sample_rate_hz"], 260.0e9);
    }
}
