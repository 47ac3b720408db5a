//! Dual-polarization sample container and small power utilities.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A dual-polarization complex baseband waveform.
///
/// Both polarizations always hold the same number of samples; constructors
/// and mutators preserve that invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPol {
    /// X-polarization samples.
    pub x: Vec<Complex64>,
    /// Y-polarization samples.
    pub y: Vec<Complex64>,
}

impl DualPol {
    /// Build from two equal-length sample vectors.
    pub fn new(x: Vec<Complex64>, y: Vec<Complex64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::SizeMismatch {
                context: "dual-polarization waveform",
                expected: x.len(),
                actual: y.len(),
            });
        }
        Ok(Self { x, y })
    }

    /// All-zero waveform of the given length.
    pub fn zeros(len: usize) -> Self {
        Self {
            x: vec![Complex64::new(0.0, 0.0); len],
            y: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    /// Number of samples per polarization.
    pub fn len(&self) -> usize {
        self.x.len()
    }

    /// True when the waveform holds no samples.
    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Mean |sample|² averaged over both polarizations.
    pub fn mean_power(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        (mean_power(&self.x) + mean_power(&self.y)) / 2.0
    }

    /// Multiply every sample in both polarizations by a real gain.
    pub fn scale(&mut self, gain: f64) {
        for s in self.x.iter_mut().chain(self.y.iter_mut()) {
            *s *= gain;
        }
    }

    /// Rescale so the mean per-sample power over both polarizations is
    /// `target`. A silent waveform is left untouched.
    pub fn normalize_power(&mut self, target: f64) {
        let p = self.mean_power();
        if p > 0.0 {
            self.scale((target / p).sqrt());
        }
    }

    /// Apply the same in-place transformation to each polarization.
    pub fn for_each_pol(&mut self, mut f: impl FnMut(&mut Vec<Complex64>)) {
        f(&mut self.x);
        f(&mut self.y);
    }
}

/// Mean |sample|² of one sequence.
pub fn mean_power(samples: &[Complex64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}

/// Relative L2 distance ‖a−b‖ / ‖a‖ between two sequences (‖a‖ taken as 1 if
/// `a` is all-zero). Handy for closeness assertions in tests and validation.
pub fn relative_l2_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "relative_l2_distance length mismatch");
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(u, v)| (u - v).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den: f64 = a.iter().map(|u| u.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}
