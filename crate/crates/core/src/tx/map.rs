//! Gray-mapped QPSK bit↔symbol conversion.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// 1/√2, the per-quadrature amplitude of a unit-energy QPSK symbol.
const Q: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Map a bit stream onto unit-energy Gray-labeled QPSK symbols: per symbol,
/// the first bit selects the real sign and the second the imaginary sign,
/// with 0 mapping to +. Bits `00` therefore give (1+j)/√2.
pub fn map_qpsk(bits: &[u8]) -> Result<Vec<Complex64>> {
    if bits.len() % 2 != 0 {
        return Err(Error::InvalidConfig(format!(
            "QPSK mapping needs an even bit count, got {}",
            bits.len()
        )));
    }
    Ok(bits
        .chunks_exact(2)
        .map(|pair| {
            Complex64::new(
                if pair[0] == 0 { Q } else { -Q },
                if pair[1] == 0 { Q } else { -Q },
            )
        })
        .collect())
}

/// Hard-decision demapping, the inverse of [`map_qpsk`] on clean symbols:
/// nonnegative real part → first bit 0; nonnegative imaginary part →
/// second bit 0.
pub fn demap_qpsk(symbols: &[Complex64]) -> Vec<u8> {
    let mut bits = Vec::with_capacity(symbols.len() * 2);
    for s in symbols {
        bits.push(if s.re >= 0.0 { 0 } else { 1 });
        bits.push(if s.im >= 0.0 { 0 } else { 1 });
    }
    bits
}

/// Nearest QPSK constellation point to `v` (the remodulated hard decision).
pub fn nearest_qpsk(v: Complex64) -> Complex64 {
    Complex64::new(
        if v.re >= 0.0 { Q } else { -Q },
        if v.im >= 0.0 { Q } else { -Q },
    )
}
