use num_complex::Complex64;
use std::f64::consts::TAU;

use nofdm::channel::apply_channel;
use nofdm::fec::LdpcCode;
use nofdm::rx::{receive, RxSideInfo};
use nofdm::scenario::{derive_seed, ScenarioConfig};
use nofdm::tx::transmit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn delay_wave(wave: &mut nofdm::waveform::DualPol, samples: f64) {
    let n = wave.len();
    let m = n.next_power_of_two() * 2;
    wave.for_each_pol(|pol| {
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        buf[..n].copy_from_slice(pol);
        nofdm::dsp::fft_forward(&mut buf);
        for (k, v) in buf.iter_mut().enumerate() {
            let f = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
            *v *= Complex64::from_polar(1.0, -TAU * f / m as f64 * samples);
        }
        nofdm::dsp::fft_inverse(&mut buf);
        pol.copy_from_slice(&buf[..n]);
    });
}

fn main() {
    for (name, delay) in [
        ("delay 0.00", 0.0),
        ("delay 0.50", 0.5),
        ("delay 1.00", 1.0),
        ("delay 1.54", 1.54),
        ("delay 3.54", 3.54),
        ("delay -3.54", -3.54),
    ] {
        let mut cfg = ScenarioConfig::default();
        cfg.info_bits_per_pol = 8000;
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
        delay_wave(&mut wave, delay);

        let tp = cfg.tx_params();
        let side = RxSideInfo::from_tx(&tp, &tx, &cfg.channel.fiber, &code);
        let rx = receive(&wave, fs, &side, &cfg.rx).unwrap();
        let (mut errs, mut bits) = (0usize, 0usize);
        for (r, t) in rx.coded_bits.iter().zip(&tx.coded_bits) {
            errs += r.iter().zip(t.iter()).filter(|(a, b)| a != b).count();
            bits += t.len();
        }
        println!("{name}: pre={:.5}", errs as f64 / bits as f64);
    }
}
