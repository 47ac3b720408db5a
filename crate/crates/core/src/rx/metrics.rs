//! Bit-error accounting and the serializable per-run metrics report.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Count positions where the two bit streams disagree.
pub fn bit_errors(a: &[u8], b: &[u8]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch {
            context: "bit streams under comparison",
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

/// Bit-error ratio between two equal-length, non-empty bit streams.
pub fn ber(a: &[u8], b: &[u8]) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::InvalidConfig(
            "cannot measure a bit-error ratio on an empty stream".into(),
        ));
    }
    Ok(bit_errors(a, b)? as f64 / a.len() as f64)
}

/// Per-subcarrier bit-error ratio measured on symbol decisions.
///
/// Both streams are laid out block-by-block across `n_sub` subcarriers,
/// so symbol `i` belongs to subcarrier `i % n_sub`. `label` maps a
/// constellation point to its `bits_per_symbol`-bit label; each received
/// symbol is scored by the Hamming distance between its label and the
/// reference symbol's label.
pub fn per_subcarrier_ber(
    received: &[Complex64],
    reference: &[Complex64],
    n_sub: usize,
    bits_per_symbol: u32,
    label: impl Fn(Complex64) -> u32,
) -> Result<Vec<f64>> {
    if n_sub == 0 || bits_per_symbol == 0 {
        return Err(Error::InvalidConfig(
            "per-subcarrier accounting needs n_sub >= 1 and at least one bit per symbol".into(),
        ));
    }
    if received.len() != reference.len() {
        return Err(Error::SizeMismatch {
            context: "symbol streams under comparison",
            expected: reference.len(),
            actual: received.len(),
        });
    }
    if received.is_empty() || received.len() % n_sub != 0 {
        return Err(Error::SizeMismatch {
            context: "symbol stream vs. subcarrier count",
            expected: n_sub.max(received.len()),
            actual: received.len(),
        });
    }
    let mut errors = vec![0usize; n_sub];
    for (i, (r, t)) in received.iter().zip(reference).enumerate() {
        let diff = label(*r) ^ label(*t);
        errors[i % n_sub] += diff.count_ones() as usize;
    }
    let bits_per_carrier = (received.len() / n_sub) as f64 * bits_per_symbol as f64;
    Ok(errors
        .into_iter()
        .map(|e| e as f64 / bits_per_carrier)
        .collect())
}

/// Two-bit Gray label of a QPSK decision (bit 0 = I sign, bit 1 = Q sign).
pub fn qpsk_label(v: Complex64) -> u32 {
    let mut label = 0;
    if v.re < 0.0 {
        label |= 1;
    }
    if v.im < 0.0 {
        label |= 2;
    }
    label
}

/// Everything a single link run reports. Field order is the serialization
/// order, so identical runs produce byte-identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub format: String,
    pub compression: String,
    pub pre_fec_ber: f64,
    pub post_fec_ber: f64,
    pub post_fec_ber_assisted: Option<f64>,
    pub per_subcarrier_ber: Vec<f64>,
    pub cfo_estimate_hz: f64,
    pub residual_cfo_hz: f64,
    pub clock_ppm_estimate: f64,
    pub demod_complex_mults: Option<u64>,
    pub demod_complex_adds: Option<u64>,
    pub seed: u64,
    pub config_digest: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_bit_error_counting() {
        assert_eq!(bit_errors(&[0, 1, 1, 0], &[0, 1, 1, 0]).unwrap(), 0);
        assert_eq!(bit_errors(&[0, 1, 1, 0], &[1, 1, 0, 0]).unwrap(), 2);
        assert!((ber(&[0, 1, 1, 0], &[1, 1, 0, 0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(bit_errors(&[0, 1], &[0]).is_err());
        assert!(ber(&[], &[]).is_err());
    }

    #[test]
    fn test_qpsk_labels_cover_all_quadrants() {
        let q = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(qpsk_label(Complex64::new(q, q)), 0);
        assert_eq!(qpsk_label(Complex64::new(-q, q)), 1);
        assert_eq!(qpsk_label(Complex64::new(q, -q)), 2);
        assert_eq!(qpsk_label(Complex64::new(-q, -q)), 3);
    }

    #[test]
    fn test_per_subcarrier_attribution() {
        // Two blocks of four subcarriers; flip only subcarrier 2's symbols.
        let q = std::f64::consts::FRAC_1_SQRT_2;
        let reference = vec![Complex64::new(q, q); 8];
        let mut received = reference.clone();
        received[2] = Complex64::new(-q, q); // one bit wrong
        received[6] = Complex64::new(-q, -q); // two bits wrong
        let ber = per_subcarrier_ber(&received, &reference, 4, 2, qpsk_label).unwrap();
        assert_eq!(ber.len(), 4);
        assert!((ber[0] - 0.0).abs() < 1e-15);
        assert!((ber[1] - 0.0).abs() < 1e-15);
        // Subcarrier 2: 3 bit errors out of 2 symbols × 2 bits.
        assert!((ber[2] - 0.75).abs() < 1e-15);
        assert!((ber[3] - 0.0).abs() < 1e-15);
    }

    #[test]
    fn test_per_subcarrier_validation() {
        let v = vec![Complex64::new(1.0, 1.0); 6];
        assert!(per_subcarrier_ber(&v, &v, 4, 2, qpsk_label).is_err());
        assert!(per_subcarrier_ber(&v, &v[..3], 3, 2, qpsk_label).is_err());
        assert!(per_subcarrier_ber(&v, &v, 0, 2, qpsk_label).is_err());
    }

    #[test]
    fn test_report_serialization_is_stable() {
        let report = MetricsReport {
            format: "qpsk-nofdm".into(),
            compression: "7/8".into(),
            pre_fec_ber: 0.015625,
            post_fec_ber: 0.0,
            post_fec_ber_assisted: Some(0.0),
            per_subcarrier_ber: vec![0.25, 0.0],
            cfo_estimate_hz: 1.0e6,
            residual_cfo_hz: -2500.0,
            clock_ppm_estimate: 49.5,
            demod_complex_mults: Some(56),
            demod_complex_adds: Some(49),
            seed: 7,
            config_digest: "00ff".into(),
        };
        let json = serde_json::to_string(&report).unwrap();
        // Frozen byte-for-byte: reruns of the same scenario must reproduce
        // reports exactly.
        assert_eq!(
            json,
            "{\"format\":\"qpsk-nofdm\",\"compression\":\"7/8\",\
             \"pre_fec_ber\":0.015625,\"post_fec_ber\":0.0,\
             \"post_fec_ber_assisted\":0.0,\"per_subcarrier_ber\":[0.25,0.0],\
             \"cfo_estimate_hz\":1000000.0,\"residual_cfo_hz\":-2500.0,\
             \"clock_ppm_estimate\":49.5,\"demod_complex_mults\":56,\
             \"demod_complex_adds\":49,\"seed\":7,\"config_digest\":\"00ff\"}"
        );
        let back: MetricsReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }
}
