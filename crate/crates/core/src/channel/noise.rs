//! Amplified-spontaneous-emission noise loading: adds circularly-symmetric
//! white Gaussian noise so the ratio of dual-polarization signal power to
//! the noise power falling in a 12.5 GHz reference bandwidth hits a target.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::waveform::DualPol;

/// Reference bandwidth of the noise-power measurement (0.1 nm at 1550 nm).
pub const OSNR_REFERENCE_BANDWIDTH_HZ: f64 = 12.5e9;

/// Adds white Gaussian noise to both polarizations so that
/// `signal_power / (noise_psd × 12.5 GHz) = 10^{osnr_db/10}`, where the
/// signal power and the noise PSD both count the two polarizations
/// together and the noise power is split equally between them.
/// `osnr_db = +∞` disables loading.
pub fn load_osnr<R: Rng + ?Sized>(
    wave: &mut DualPol,
    sample_rate: f64,
    osnr_db: f64,
    rng: &mut R,
) -> Result<()> {
    if osnr_db == f64::INFINITY {
        return Ok(());
    }
    if !osnr_db.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "OSNR target must be finite or +inf, got {osnr_db}"
        )));
    }
    if !sample_rate.is_finite() || sample_rate <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "sample rate must be positive, got {sample_rate}"
        )));
    }
    let signal_power = wave.mean_power() * 2.0; // per-sample power summed over both pols
    if signal_power == 0.0 || wave.len() == 0 {
        return Ok(());
    }
    // Dual-pol noise PSD that meets the target, then the per-pol,
    // per-sample complex variance over the simulated bandwidth.
    let noise_psd = signal_power * 10f64.powf(-osnr_db / 10.0) / OSNR_REFERENCE_BANDWIDTH_HZ;
    let var_per_pol = noise_psd * sample_rate / 2.0;
    let sigma = (var_per_pol / 2.0).sqrt(); // per quadrature
    wave.for_each_pol(|pol| {
        for v in pol.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            v.re += sigma * re;
            v.im += sigma * im;
        }
    });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{fft_forward, fft_inverse, power_spectrum};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    /// White complex Gaussian noise band-limited to |f| <= `cutoff`·fs by
    /// zeroing FFT bins, so the band above `cutoff` is noise-free and can
    /// serve as a pure noise-measurement window after loading.
    fn band_limited_signal(n: usize, cutoff: f64, rng: &mut ChaCha12Rng) -> Vec<Complex64> {
        let mut sig: Vec<Complex64> = (0..n)
            .map(|_| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            })
            .collect();
        fft_forward(&mut sig);
        for (k, v) in sig.iter_mut().enumerate() {
            let f = if k <= (n - 1) / 2 {
                k as f64 / n as f64
            } else {
                k as f64 / n as f64 - 1.0
            };
            if f.abs() > cutoff {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        fft_inverse(&mut sig);
        sig
    }

    /// Periodogram-based OSNR estimate: noise PSD from the signal-free
    /// outer band, signal power as total power minus the noise share.
    fn estimate_osnr_db(wave: &DualPol, sample_rate: f64) -> f64 {
        let n = wave.len();
        let mut noise_psd_dual = 0.0;
        let mut total_power = 0.0;
        for pol in [&wave.x, &wave.y] {
            let spec = power_spectrum(pol);
            total_power += spec.iter().sum::<f64>() / n as f64;
            let outer: Vec<f64> = spec
                .iter()
                .enumerate()
                .filter_map(|(k, &p)| {
                    let f = if k <= (n - 1) / 2 {
                        k as f64 / n as f64
                    } else {
                        k as f64 / n as f64 - 1.0
                    };
                    (f.abs() > 0.30 && f.abs() < 0.45).then_some(p)
                })
                .collect();
            let mean_bin = outer.iter().sum::<f64>() / outer.len() as f64;
            // Bin power |X|²/N → per-pol PSD is |X|²/(N·fs).
            noise_psd_dual += mean_bin / sample_rate;
        }
        let signal_power = total_power - noise_psd_dual * sample_rate;
        10.0 * (signal_power / (noise_psd_dual * OSNR_REFERENCE_BANDWIDTH_HZ)).log10()
    }

    #[test]
    fn test_infinite_osnr_is_identity() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let x = band_limited_signal(256, 0.2, &mut rng);
        let y = band_limited_signal(256, 0.2, &mut rng);
        let original = DualPol::new(x, y).unwrap();
        let mut wave = original.clone();
        load_osnr(&mut wave, 100e9, f64::INFINITY, &mut rng).unwrap();
        assert_eq!(wave.x, original.x);
        assert_eq!(wave.y, original.y);
    }

    #[test]
    fn test_nan_osnr_rejected() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let mut wave = DualPol::zeros(16);
        assert!(load_osnr(&mut wave, 100e9, f64::NAN, &mut rng).is_err());
        assert!(load_osnr(&mut wave, 100e9, f64::NEG_INFINITY, &mut rng).is_err());
    }

    #[test]
    fn test_measured_osnr_matches_target() {
        let fs = 100e9;
        let n = 1 << 17;
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        let x = band_limited_signal(n, 0.2, &mut rng);
        let y = band_limited_signal(n, 0.2, &mut rng);
        let mut wave = DualPol::new(x, y).unwrap();
        load_osnr(&mut wave, fs, 20.0, &mut rng).unwrap();
        let measured = estimate_osnr_db(&wave, fs);
        assert!(
            (measured - 20.0).abs() < 0.2,
            "estimated OSNR {measured} dB vs target 20 dB"
        );
    }

    #[test]
    fn test_three_db_less_osnr_doubles_noise_power() {
        let fs = 100e9;
        let n = 1 << 16;
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let x = band_limited_signal(n, 0.2, &mut rng);
        let y = band_limited_signal(n, 0.2, &mut rng);
        let clean = DualPol::new(x, y).unwrap();
        let clean_power = clean.mean_power();

        let mut at20 = clean.clone();
        load_osnr(&mut at20, fs, 20.0, &mut ChaCha12Rng::seed_from_u64(100)).unwrap();
        let mut at17 = clean.clone();
        load_osnr(&mut at17, fs, 17.0, &mut ChaCha12Rng::seed_from_u64(101)).unwrap();

        let noise20 = at20.mean_power() - clean_power;
        let noise17 = at17.mean_power() - clean_power;
        let ratio = noise17 / noise20;
        let expected = 10f64.powf(0.3);
        assert!(
            (ratio - expected).abs() / expected < 0.05,
            "noise power ratio {ratio} vs {expected}"
        );
    }
}
