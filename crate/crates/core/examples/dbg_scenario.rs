use nofdm::rx::timing::tone_cfo_estimate;
use nofdm::scenario::{run_scenario, ScenarioConfig};
use nofdm::waveform::DualPol;

fn spectrum_near(wave: &DualPol, fs: f64, f0: f64, span_bins: i64) {
    use num_complex::Complex64;
    let n_in = wave.len();
    let n = 1usize << (63 - (n_in.min(1 << 16) as u64).leading_zeros());
    let start = (n_in - n) / 2;
    let mut power = vec![0.0f64; n];
    for pol in [&wave.x, &wave.y] {
        let mut buf: Vec<Complex64> = pol[start..start + n].to_vec();
        nofdm::dsp::fft_forward(&mut buf);
        for (p, v) in power.iter_mut().zip(&buf) {
            *p += v.norm_sqr();
        }
    }
    let center = (f0 / fs * n as f64).round() as i64;
    let median = {
        let mut s: Vec<f64> = power.clone();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s[n / 2]
    };
    print!("  bins {}..{}: ", center - span_bins, center + span_bins);
    for k in (center - span_bins)..=(center + span_bins) {
        let idx = k.rem_euclid(n as i64) as usize;
        print!("{:.1} ", 10.0 * (power[idx] / median).log10());
    }
    println!();
}

fn main() {
    for (name, cw, spans, ppm, cfo, lw, osnr) in [
        ("noiseless 1cw", 1usize, 25usize, 0.0, 0.0, 0.0, f64::INFINITY),
        ("osnr22 1cw", 1, 25, 0.0, 0.0, 0.0, 22.0),
        ("osnr22+cfo50 1cw", 1, 25, 0.0, 50.0e6, 0.0, 22.0),
        ("full-mild 1cw", 1, 25, 20.0, 50.0e6, 30.0e3, 22.0),
        ("full-mild 4cw", 4, 25, 20.0, 200.0e6, 50.0e3, 22.0),
        ("cfo200 1cw", 1, 25, 0.0, 200.0e6, 0.0, 22.0),
    ] {
        let mut cfg = ScenarioConfig::default();
        cfg.info_bits_per_pol = 8000 * cw;
        cfg.channel.fiber.span_count = spans;
        cfg.channel.impairments.clock_ppm = ppm;
        cfg.channel.impairments.cfo_hz = cfo;
        cfg.channel.impairments.linewidth_hz = lw;
        cfg.channel.impairments.osnr_db = osnr;
        cfg.seed = 11;
        match run_scenario(&cfg) {
            Ok(run) => {
                let fs = cfg.baud * cfg.sps as f64;
                let coarse = tone_cfo_estimate(&run.received_wave, fs, cfg.baud, cfg.tone_divisor);
                println!(
                    "{name}: pre={:.5} post={:.5} cfo={:.2}MHz ppm={:.1} coarse={:?}MHz",
                    run.report.pre_fec_ber,
                    run.report.post_fec_ber,
                    (run.report.cfo_estimate_hz + run.report.residual_cfo_hz) / 1e6,
                    run.report.clock_ppm_estimate,
                    coarse.map(|c| (c / 1e6 * 100.0).round() / 100.0),
                );
                let _ = fs;
                let per_pol: Vec<f64> = run
                    .rx
                    .coded_bits
                    .iter()
                    .zip(&run.tx.coded_bits)
                    .map(|(r, t)| {
                        let errs = r.iter().zip(t.iter()).filter(|(a, b)| a != b).count();
                        errs as f64 / t.len() as f64
                    })
                    .collect();
                println!(
                    "  per-pol pre-FEC: x={:.4} y={:.4}  per-sc: {:?}  cpr_low={} resid={:+.2}MHz",
                    per_pol[0],
                    per_pol[1],
                    run.report
                        .per_subcarrier_ber
                        .iter()
                        .map(|b| (b * 1e3).round() / 1e3)
                        .collect::<Vec<_>>(),
                    run.rx.cpr_low_confidence,
                    run.report.residual_cfo_hz / 1e6,
                );
            }
            Err(e) => println!("{name}: ERROR {e}"),
        }
    }
}
