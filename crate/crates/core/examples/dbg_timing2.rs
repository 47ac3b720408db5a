use num_complex::Complex64;

use nofdm::channel::{apply_channel, compensate_cd};
use nofdm::fec::LdpcCode;
use nofdm::rx::timing::{timing_recovery, tone_cfo_estimate, TimingConfig};
use nofdm::scenario::{derive_seed, ScenarioConfig};
use nofdm::tx::rrc::{matched_filter, rrc_taps};
use nofdm::tx::transmit;
use nofdm::waveform::DualPol;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn main() {
    for (name, cfo, derot) in [
        ("cfo50 derot=measured", 50.0e6, f64::NAN),
        ("cfo50 derot=exact", 50.0e6, 50.0e6),
        ("cfo50 derot=none", 50.0e6, 0.0),
        ("cfo0  derot=none", 0.0, 0.0),
    ] {
        let mut cfg = ScenarioConfig::default();
        cfg.info_bits_per_pol = 8000;
        cfg.channel.impairments.cfo_hz = cfo;
        cfg.channel.impairments.osnr_db = 22.0;
        cfg.seed = 11;
        let code = LdpcCode::rate_5_6(cfg.fec_block_bits).unwrap();
        let mut info_rng = ChaCha12Rng::seed_from_u64(derive_seed(cfg.seed, 0, "info"));
        let ix: Vec<u8> = (0..cfg.info_bits_per_pol).map(|_| info_rng.random::<bool>() as u8).collect();
        let iy: Vec<u8> = (0..cfg.info_bits_per_pol).map(|_| info_rng.random::<bool>() as u8).collect();
        let mut frame_rng = ChaCha12Rng::seed_from_u64(derive_seed(cfg.seed, 0, "frame"));
        let tx = transmit(&cfg.tx_params(), &code, [&ix, &iy], &mut frame_rng).unwrap();
        let fs = cfg.baud * cfg.sps as f64;
        let mut wave = tx.waveform.wave.clone();
        let mut chan = cfg.channel.clone();
        chan.impairments.seed = derive_seed(cfg.seed, 0, "channel");
        apply_channel(&mut wave, fs, &chan).unwrap();

        compensate_cd(&mut wave, fs, &cfg.channel.fiber).unwrap();
        let taps = rrc_taps(cfg.rolloff, cfg.sps as usize, cfg.rrc_span_symbols).unwrap();
        let mut front = DualPol::new(
            matched_filter(&wave.x, &taps),
            matched_filter(&wave.y, &taps),
        )
        .unwrap();
        let used = if derot.is_nan() {
            tone_cfo_estimate(&front, fs, cfg.baud, cfg.tone_divisor).unwrap()
        } else {
            derot
        };
        let w = std::f64::consts::TAU * used / fs;
        front.for_each_pol(|pol| {
            for (i, v) in pol.iter_mut().enumerate() {
                *v *= Complex64::from_polar(1.0, -w * i as f64);
            }
        });
        let mut tcfg = TimingConfig::default();
        tcfg.tone_divisor = cfg.tone_divisor;
        let out = timing_recovery(&front, cfg.sps as usize, &tcfg).unwrap();
        let trace: Vec<String> = out.trace.iter().map(|t| format!("{t:+.2}")).collect();
        println!(
            "{name}: derot={:+.1}MHz ppm={:+.1}\n  trace: {}",
            used / 1e6,
            out.ppm_estimate,
            trace.join(" ")
        );
    }
}
