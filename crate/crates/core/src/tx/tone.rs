//! Timing-tone insertion: a pair of complex exponentials at ±(baud/K) added
//! on top of the shaped signal, sized by the signal-to-tone power ratio.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::waveform::DualPol;

/// Add the ± timing tones to both polarizations in place.
///
/// Per polarization the total tone power is `signal_power · 10^{−ratio_db/10}`,
/// split equally between the two tones; both start at zero phase. A ratio of
/// +∞ dB leaves the waveform untouched.
pub fn insert_tones(
    wave: &mut DualPol,
    sample_rate: f64,
    baud: f64,
    k: u32,
    ratio_db: f64,
) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!(
            "tone divisor must be at least 2, got {k}"
        )));
    }
    if ratio_db.is_nan() || ratio_db == f64::NEG_INFINITY {
        return Err(Error::InvalidConfig(format!(
            "signal-to-tone ratio must be a real dB value, got {ratio_db}"
        )));
    }
    let f_tone = baud / k as f64;
    if f_tone >= sample_rate / 2.0 {
        return Err(Error::InvalidConfig(format!(
            "tone at {f_tone} Hz does not fit below the Nyquist frequency of a \
             {sample_rate} Sa/s waveform"
        )));
    }
    if ratio_db == f64::INFINITY {
        return Ok(());
    }
    let tone_fraction = 10f64.powf(-ratio_db / 10.0);
    let w = 2.0 * std::f64::consts::PI * f_tone / sample_rate;
    wave.for_each_pol(|pol| {
        let n = pol.len();
        if n == 0 {
            return;
        }
        let signal_power = pol.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        let amp = (signal_power * tone_fraction / 2.0).sqrt();
        for (i, v) in pol.iter_mut().enumerate() {
            let phase = w * i as f64;
            // a·e^{+jφ} + a·e^{−jφ} = 2a·cos φ
            *v += Complex64::new(2.0 * amp * phase.cos(), 0.0);
        }
    });
    Ok(())
}
