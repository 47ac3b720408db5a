//! Frame assembly in the subcarrier domain: a training sequence of two
//! identical halves (for correlation sync and frequency-offset estimation)
//! followed by payload symbols with one known pilot symbol ahead of every
//! group of `pilot_spacing` payload symbols.
//!
//! A "symbol" here is one multicarrier symbol: `n_sub` consecutive
//! subcarrier values in a flattened grid.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tx::map::map_qpsk;

/// Frame geometry and tone bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameLayout {
    /// Training-sequence length in symbols (two identical halves).
    pub ts_symbols: usize,
    /// Payload symbols per pilot.
    pub pilot_spacing: usize,
    /// Payload symbols per frame.
    pub payload_symbols: usize,
    /// Timing tones sit at ±(baud / tone_divisor).
    pub tone_divisor: u32,
    /// Signal-to-tone power ratio in dB (+∞ disables the tones).
    pub tone_ratio_db: f64,
}

impl FrameLayout {
    /// Check the counting invariants.
    pub fn validate(&self) -> Result<()> {
        if self.ts_symbols == 0 || self.ts_symbols % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "training sequence must have a positive even symbol count, got {}",
                self.ts_symbols
            )));
        }
        if self.pilot_spacing == 0 {
            return Err(Error::InvalidConfig(
                "pilot spacing must be positive".into(),
            ));
        }
        if self.payload_symbols % self.pilot_spacing != 0 {
            return Err(Error::InvalidConfig(format!(
                "payload of {} symbols is not divisible by the pilot spacing {}",
                self.payload_symbols, self.pilot_spacing
            )));
        }
        if self.tone_divisor < 2 {
            return Err(Error::InvalidConfig(format!(
                "tone divisor must be at least 2, got {}",
                self.tone_divisor
            )));
        }
        Ok(())
    }

    /// Number of pilot symbols in the frame.
    pub fn pilot_count(&self) -> usize {
        self.payload_symbols / self.pilot_spacing
    }

    /// Total frame length in symbols.
    pub fn total_symbols(&self) -> usize {
        self.ts_symbols + self.payload_symbols + self.pilot_count()
    }
}

/// The known (transmit-side) TS and pilot subcarrier values of one
/// polarization.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownSymbols {
    /// `ts_symbols · n_sub` values; the second half repeats the first.
    pub ts: Vec<Complex64>,
    /// `pilot_count · n_sub` values.
    pub pilots: Vec<Complex64>,
}

/// Draw the known QPSK content of one polarization's TS and pilots from
/// `rng`. Consecutive calls give distinct (per-polarization) sequences.
pub fn generate_known_symbols<R: Rng>(
    layout: &FrameLayout,
    n_sub: usize,
    rng: &mut R,
) -> Result<KnownSymbols> {
    layout.validate()?;
    let half_bits: Vec<u8> = (0..layout.ts_symbols / 2 * n_sub * 2)
        .map(|_| rng.random_range(0..2u8))
        .collect();
    let half = map_qpsk(&half_bits)?;
    let mut ts = half.clone();
    ts.extend_from_slice(&half);
    let pilot_bits: Vec<u8> = (0..layout.pilot_count() * n_sub * 2)
        .map(|_| rng.random_range(0..2u8))
        .collect();
    let pilots = map_qpsk(&pilot_bits)?;
    Ok(KnownSymbols { ts, pilots })
}

/// Assemble the frame grid: TS, then `[pilot, pilot_spacing payload
/// symbols]` groups.
pub fn build_frame(
    payload: &[Complex64],
    known: &KnownSymbols,
    layout: &FrameLayout,
    n_sub: usize,
) -> Result<Vec<Complex64>> {
    layout.validate()?;
    if payload.len() != layout.payload_symbols * n_sub {
        return Err(Error::SizeMismatch {
            context: "frame payload grid",
            expected: layout.payload_symbols * n_sub,
            actual: payload.len(),
        });
    }
    if known.ts.len() != layout.ts_symbols * n_sub
        || known.pilots.len() != layout.pilot_count() * n_sub
    {
        return Err(Error::SizeMismatch {
            context: "known frame symbols",
            expected: (layout.ts_symbols + layout.pilot_count()) * n_sub,
            actual: known.ts.len() + known.pilots.len(),
        });
    }
    let mut grid = Vec::with_capacity(layout.total_symbols() * n_sub);
    grid.extend_from_slice(&known.ts);
    let group = layout.pilot_spacing * n_sub;
    for (i, chunk) in payload.chunks(group).enumerate() {
        grid.extend_from_slice(&known.pilots[i * n_sub..(i + 1) * n_sub]);
        grid.extend_from_slice(chunk);
    }
    Ok(grid)
}

/// Split a frame grid back into payload and the symbols found at the pilot
/// positions. Inverse of [`build_frame`] on a clean grid.
pub fn deframe(
    frame: &[Complex64],
    layout: &FrameLayout,
    n_sub: usize,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    layout.validate()?;
    if frame.len() != layout.total_symbols() * n_sub {
        return Err(Error::SizeMismatch {
            context: "frame grid",
            expected: layout.total_symbols() * n_sub,
            actual: frame.len(),
        });
    }
    let body = &frame[layout.ts_symbols * n_sub..];
    let mut payload = Vec::with_capacity(layout.payload_symbols * n_sub);
    let mut pilots = Vec::with_capacity(layout.pilot_count() * n_sub);
    let group = (layout.pilot_spacing + 1) * n_sub;
    for chunk in body.chunks(group) {
        pilots.extend_from_slice(&chunk[..n_sub]);
        payload.extend_from_slice(&chunk[n_sub..]);
    }
    Ok((payload, pilots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn layout(payload: usize) -> FrameLayout {
        FrameLayout {
            ts_symbols: 64,
            pilot_spacing: 4,
            payload_symbols: payload,
            tone_divisor: 4,
            tone_ratio_db: 13.0,
        }
    }

    #[test]
    fn test_pilot_counting() {
        let l = layout(400);
        assert_eq!(l.pilot_count(), 100);
        assert_eq!(l.total_symbols(), 64 + 400 + 100);
    }

    #[test]
    fn test_empty_payload_gives_ts_only() {
        let l = layout(0);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let known = generate_known_symbols(&l, 8, &mut rng).unwrap();
        let frame = build_frame(&[], &known, &l, 8).unwrap();
        assert_eq!(frame, known.ts);
    }

    #[test]
    fn test_ts_halves_identical() {
        let l = layout(16);
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let known = generate_known_symbols(&l, 8, &mut rng).unwrap();
        let half = l.ts_symbols / 2 * 8;
        assert_eq!(known.ts[..half], known.ts[half..]);
        // Consecutive draws differ (per-polarization TS content).
        let other = generate_known_symbols(&l, 8, &mut rng).unwrap();
        assert_ne!(known.ts, other.ts);
    }

    #[test]
    fn test_round_trip() {
        let l = layout(40);
        let n_sub = 8;
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let known = generate_known_symbols(&l, n_sub, &mut rng).unwrap();
        let payload: Vec<Complex64> = (0..l.payload_symbols * n_sub)
            .map(|i| Complex64::new(i as f64, -(i as f64)))
            .collect();
        let frame = build_frame(&payload, &known, &l, n_sub).unwrap();
        assert_eq!(frame.len(), l.total_symbols() * n_sub);
        let (back, pilots) = deframe(&frame, &l, n_sub).unwrap();
        assert_eq!(back, payload);
        assert_eq!(pilots, known.pilots);
    }

    #[test]
    fn test_validation() {
        let mut l = layout(40);
        l.payload_symbols = 41; // not divisible by 4
        assert!(l.validate().is_err());
        let l = layout(40);
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let known = generate_known_symbols(&l, 8, &mut rng).unwrap();
        // Payload grid length mismatch.
        assert!(build_frame(&[Complex64::new(0.0, 0.0)], &known, &l, 8).is_err());
        let mut bad = l;
        bad.ts_symbols = 63;
        assert!(bad.validate().is_err());
    }
}
