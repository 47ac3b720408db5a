//! Narrow IIR notch that removes the timing tones once the clock has been
//! recovered, so the residual lines do not bias the equalizer.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Apply the second-order notch
/// `H(z) = (1 − 2·cosθ·z⁻¹ + z⁻²) / (1 − 2·r₀·cosθ·z⁻¹ + r₀²·z⁻²)`
/// in place. Real coefficients put zeros on the unit circle at ±θ, so one
/// pass suppresses both tone lines; `r₀` just inside the unit circle sets
/// the notch width.
pub fn notch_filter(signal: &mut [Complex64], theta: f64, r0: f64) -> Result<()> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::InvalidConfig(format!(
            "notch frequency must lie strictly inside (0, π) rad/sample, got {theta}"
        )));
    }
    if !(r0 > 0.0 && r0 < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "notch pole radius must lie strictly inside (0, 1), got {r0}"
        )));
    }
    let b1 = -2.0 * theta.cos();
    let b2 = 1.0;
    let a1 = r0 * b1;
    let a2 = r0 * r0;
    // Direct form II transposed.
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s2 = Complex64::new(0.0, 0.0);
    for v in signal.iter_mut() {
        let x = *v;
        let y = x + s1;
        s1 = b1 * x - a1 * y + s2;
        s2 = b2 * x - a2 * y;
        *v = y;
    }
    Ok(())
}

/// Frequency response of the notch at `omega` rad/sample.
pub fn notch_response(theta: f64, r0: f64, omega: f64) -> Complex64 {
    let z1 = Complex64::from_polar(1.0, -omega);
    let z2 = Complex64::from_polar(1.0, -2.0 * omega);
    let num = Complex64::new(1.0, 0.0) - 2.0 * theta.cos() * z1 + z2;
    let den = Complex64::new(1.0, 0.0) - 2.0 * r0 * theta.cos() * z1 + r0 * r0 * z2;
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn steady_state_gain(theta: f64, r0: f64, omega: f64) -> f64 {
        // Feed a unit complex tone and compare output to input amplitude
        // once the transient has decayed.
        let n = 4000;
        let mut signal: Vec<Complex64> = (0..n)
            .map(|i| Complex64::from_polar(1.0, omega * i as f64))
            .collect();
        notch_filter(&mut signal, theta, r0).unwrap();
        let tail = &signal[n - 500..];
        (tail.iter().map(|v| v.norm_sqr()).sum::<f64>() / tail.len() as f64).sqrt()
    }

    #[test]
    fn test_notch_frequency_is_nulled() {
        let theta = PI / 4.0;
        let r0 = 0.985;
        assert!(notch_response(theta, r0, theta).norm() < 1e-12);
        assert!(notch_response(theta, r0, -theta).norm() < 1e-12);
        // Empirically ≥ 40 dB on both tone lines (far deeper once settled).
        assert!(steady_state_gain(theta, r0, theta) < 1e-4);
        assert!(steady_state_gain(theta, r0, -theta) < 1e-4);
    }

    #[test]
    fn test_dc_gain_matches_closed_form() {
        // At θ = π/2 the z⁻¹ terms vanish at z = 1: H(1) = 2/(1 + r₀²).
        let r0 = 0.95;
        let expected = 2.0 / 1.9025;
        assert!((notch_response(FRAC_PI_2, r0, 0.0).norm() - expected).abs() < 1e-12);
        let mut dc = vec![Complex64::new(1.0, 0.0); 4000];
        notch_filter(&mut dc, FRAC_PI_2, r0).unwrap();
        assert!((dc[3999].re - expected).abs() < 1e-9);
        assert!(dc[3999].im.abs() < 1e-9);
    }

    #[test]
    fn test_filter_matches_response_off_notch() {
        // The implementation must realize the stated transfer function away
        // from the notch too.
        let theta = PI / 4.0;
        let r0 = 0.985;
        for omega in [0.3, -1.2, 2.5] {
            let measured = steady_state_gain(theta, r0, omega);
            let expected = notch_response(theta, r0, omega).norm();
            assert!(
                (measured - expected).abs() < 1e-6,
                "omega {omega}: measured {measured}, expected {expected}"
            );
            // A narrow notch leaves the rest of the band essentially flat.
            assert!((expected - 1.0).abs() < 0.05, "omega {omega}: {expected}");
        }
    }

    #[test]
    fn test_parameter_validation() {
        let mut v = vec![Complex64::new(1.0, 0.0); 4];
        assert!(notch_filter(&mut v, 0.0, 0.985).is_err());
        assert!(notch_filter(&mut v, PI, 0.985).is_err());
        assert!(notch_filter(&mut v, 1.0, 1.0).is_err());
        assert!(notch_filter(&mut v, 1.0, 0.0).is_err());
        assert!(notch_filter(&mut v, 1.0, f64::NAN).is_err());
        assert!(notch_filter(&mut v, f64::NAN, 0.985).is_err());
    }
}
