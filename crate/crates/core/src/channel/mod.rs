//! Linear impairment channel: chromatic dispersion, cascaded WSS filtering,
//! local-oscillator frequency offset and phase noise, sampling-clock offset,
//! and ASE noise loading to a target OSNR. Every stage except noise addition
//! is a linear operator; the stochastic stages draw from RNGs derived from
//! the spec's seed, so a run is reproducible bit-for-bit.

pub mod cd;
pub mod clock;
pub mod lo;
pub mod noise;
pub mod wss;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

pub use cd::{apply_cd, compensate_cd, C_LIGHT, FiberSpec};
pub use clock::{apply_clock_offset, resample};
pub use lo::apply_cfo_phase_noise;
pub use noise::{load_osnr, OSNR_REFERENCE_BANDWIDTH_HZ};
pub use wss::{apply_wss_cascade, calibrate, WssCalibration, WssSpec};

use crate::error::{Error, Result};
use crate::waveform::DualPol;

/// Non-propagation impairments: receiver-side noise, oscillator offsets,
/// and the converter clock error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpairmentSpec {
    /// Target OSNR in dB over a 12.5 GHz reference bandwidth; +inf disables
    /// noise loading.
    pub osnr_db: f64,
    /// Carrier frequency offset in Hz.
    pub cfo_hz: f64,
    /// Combined transmitter + LO linewidth in Hz.
    pub linewidth_hz: f64,
    /// Sampling-clock offset in parts per million.
    pub clock_ppm: f64,
    /// Seed for the channel's stochastic stages (phase noise, ASE draws).
    #[serde(default)]
    pub seed: u64,
}

impl Default for ImpairmentSpec {
    fn default() -> Self {
        Self {
            osnr_db: f64::INFINITY,
            cfo_hz: 0.0,
            linewidth_hz: 0.0,
            clock_ppm: 0.0,
            seed: 0,
        }
    }
}

impl ImpairmentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.osnr_db.is_nan() || self.osnr_db == f64::NEG_INFINITY {
            return Err(Error::InvalidConfig(format!(
                "OSNR target must be finite or +inf, got {}",
                self.osnr_db
            )));
        }
        if !self.cfo_hz.is_finite() {
            return Err(Error::InvalidConfig("CFO must be finite".into()));
        }
        if !self.linewidth_hz.is_finite() || self.linewidth_hz < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "linewidth must be non-negative, got {}",
                self.linewidth_hz
            )));
        }
        if !self.clock_ppm.is_finite() || self.clock_ppm.abs() >= 1000.0 {
            return Err(Error::InvalidConfig(format!(
                "clock offset must satisfy |ppm| < 1000, got {}",
                self.clock_ppm
            )));
        }
        Ok(())
    }
}

/// Complete channel description as it appears in scenario configs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub fiber: FiberSpec,
    pub wss: WssSpec,
    pub impairments: ImpairmentSpec,
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        self.fiber.validate()?;
        self.wss.validate()?;
        self.impairments.validate()
    }
}

/// SplitMix64 finalizer; decorrelates per-stage seeds derived from one base.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Independent RNG for one named channel stage.
fn stage_rng(seed: u64, stage: &str) -> ChaCha12Rng {
    let mut h = seed;
    for b in stage.bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    ChaCha12Rng::seed_from_u64(h)
}

/// Runs the waveform through every impairment in the fixed order
/// dispersion → WSS filtering → LO offset/phase noise → clock offset →
/// ASE loading. The waveform length can change slightly when a clock
/// offset resamples it.
pub fn apply_channel(wave: &mut DualPol, sample_rate: f64, spec: &ChannelSpec) -> Result<()> {
    spec.validate()?;
    apply_cd(wave, sample_rate, &spec.fiber)?;
    apply_wss_cascade(wave, sample_rate, &spec.wss)?;
    let imp = &spec.impairments;
    apply_cfo_phase_noise(
        wave,
        sample_rate,
        imp.cfo_hz,
        imp.linewidth_hz,
        &mut stage_rng(imp.seed, "lo-phase"),
    )?;
    apply_clock_offset(wave, imp.clock_ppm)?;
    load_osnr(
        wave,
        sample_rate,
        imp.osnr_db,
        &mut stage_rng(imp.seed, "ase"),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::relative_l2_distance;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};

    fn random_wave(n: usize, seed: u64) -> DualPol {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut draw = |_| {
            (0..n)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect::<Vec<_>>()
        };
        DualPol::new(draw(0), draw(1)).unwrap()
    }

    fn full_spec(seed: u64) -> ChannelSpec {
        ChannelSpec {
            fiber: FiberSpec::default(),
            wss: WssSpec::calibrated(3),
            impairments: ImpairmentSpec {
                osnr_db: 22.0,
                cfo_hz: 1.2e9,
                linewidth_hz: 100e3,
                clock_ppm: 50.0,
                seed,
            },
        }
    }

    #[test]
    fn test_default_spec_is_transparent_except_fiber() {
        // Default impairments are all off; with zero spans the channel is
        // the identity.
        let spec = ChannelSpec {
            fiber: FiberSpec {
                span_count: 0,
                ..FiberSpec::default()
            },
            ..ChannelSpec::default()
        };
        let original = random_wave(512, 3);
        let mut wave = original.clone();
        apply_channel(&mut wave, 200e9, &spec).unwrap();
        assert!(relative_l2_distance(&wave.x, &original.x) < 1e-12);
    }

    #[test]
    fn test_reproducible_bit_for_bit() {
        let spec = full_spec(42);
        let original = random_wave(4096, 7);
        let mut a = original.clone();
        let mut b = original.clone();
        apply_channel(&mut a, 227.5e9, &spec).unwrap();
        apply_channel(&mut b, 227.5e9, &spec).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.y, b.y);

        let mut c = original.clone();
        apply_channel(&mut c, 227.5e9, &full_spec(43)).unwrap();
        assert_ne!(a.x, c.x);
    }

    #[test]
    fn test_noiseless_channel_is_linear() {
        // With noise loading off, every stage (including the seeded phase
        // noise trajectory) is a fixed linear operator, so superposition
        // holds to numerical precision.
        let mut spec = full_spec(11);
        spec.impairments.osnr_db = f64::INFINITY;
        let a = random_wave(2048, 1);
        let b = random_wave(2048, 2);
        let sum = DualPol::new(
            a.x.iter().zip(&b.x).map(|(u, v)| u + v).collect(),
            a.y.iter().zip(&b.y).map(|(u, v)| u + v).collect(),
        )
        .unwrap();

        let mut out_a = a.clone();
        let mut out_b = b.clone();
        let mut out_sum = sum.clone();
        apply_channel(&mut out_a, 227.5e9, &spec).unwrap();
        apply_channel(&mut out_b, 227.5e9, &spec).unwrap();
        apply_channel(&mut out_sum, 227.5e9, &spec).unwrap();

        let recombined: Vec<Complex64> =
            out_a.x.iter().zip(&out_b.x).map(|(u, v)| u + v).collect();
        assert!(relative_l2_distance(&out_sum.x, &recombined) < 1e-9);
    }

    #[test]
    fn test_stage_rngs_are_decoupled() {
        // Turning the phase-noise stage off must not change the ASE draws.
        let original = random_wave(1024, 9);
        let mut with_pn = original.clone();
        let mut without_pn = original.clone();
        let mut spec = ChannelSpec {
            fiber: FiberSpec {
                span_count: 0,
                ..FiberSpec::default()
            },
            wss: WssSpec::calibrated(0),
            impairments: ImpairmentSpec {
                osnr_db: 25.0,
                cfo_hz: 0.0,
                linewidth_hz: 150e3,
                clock_ppm: 0.0,
                seed: 5,
            },
        };
        apply_channel(&mut with_pn, 200e9, &spec).unwrap();
        spec.impairments.linewidth_hz = 0.0;
        apply_channel(&mut without_pn, 200e9, &spec).unwrap();
        // Subtracting the (identical) noise realizations leaves only the
        // phase-noise difference; verify the noise itself matched by
        // checking Y-pol noise equality after removing the signal.
        let noise_a: Vec<Complex64> = without_pn
            .x
            .iter()
            .zip(&original.x)
            .map(|(u, v)| u - v)
            .collect();
        // Reconstruct the same stage RNG and confirm the draw sequence is
        // what load_osnr added in both runs.
        let mut expect_a = original.clone();
        load_osnr(&mut expect_a, 200e9, 25.0, &mut stage_rng(5, "ase")).unwrap();
        let expected_noise: Vec<Complex64> = expect_a
            .x
            .iter()
            .zip(&original.x)
            .map(|(u, v)| u - v)
            .collect();
        assert!(relative_l2_distance(&expected_noise, &noise_a) < 1e-12);
        // And the phase-noise run saw the identical ASE realization:
        // subtract the separately reconstructed rotated signal.
        let mut rotated = original.clone();
        apply_cfo_phase_noise(
            &mut rotated,
            200e9,
            0.0,
            150e3,
            &mut stage_rng(5, "lo-phase"),
        )
        .unwrap();
        let rotated_noise: Vec<Complex64> = with_pn
            .x
            .iter()
            .zip(&rotated.x)
            .map(|(u, v)| u - v)
            .collect();
        assert!(relative_l2_distance(&expected_noise, &rotated_noise) < 1e-12);
    }

    #[test]
    fn test_spec_round_trips_through_toml() {
        let spec = full_spec(123);
        let text = toml::to_string(&spec).unwrap();
        let back: ChannelSpec = toml::from_str(&text).unwrap();
        assert_eq!(spec, back);
        // Infinite OSNR (noise off) must survive serialization too.
        let quiet = ChannelSpec::default();
        let text = toml::to_string(&quiet).unwrap();
        let back: ChannelSpec = toml::from_str(&text).unwrap();
        assert_eq!(back.impairments.osnr_db, f64::INFINITY);
    }
}
