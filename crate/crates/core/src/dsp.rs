//! Shared FFT plumbing and small signal-processing helpers used across the
//! transmitter, channel, and receiver: forward/inverse transforms with
//! explicit normalization, FFT-based convolution, and frequency grids.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// In-place forward DFT (unnormalized, matching the usual e^{-j2πnk/N}
/// analysis kernel).
pub fn fft_forward(buf: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(buf);
}

/// In-place inverse DFT, normalized by 1/N so that
/// `fft_inverse(fft_forward(x)) = x`.
pub fn fft_inverse(buf: &mut [Complex64]) {
    let n = buf.len();
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(buf);
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Smallest power of two that is ≥ `n`.
pub fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// Full linear convolution of `signal` with a real `kernel` via
/// zero-padded FFTs. Output length is `signal.len() + kernel.len() - 1`.
pub fn fft_convolve_full(signal: &[Complex64], kernel: &[f64]) -> Vec<Complex64> {
    if signal.is_empty() || kernel.is_empty() {
        return Vec::new();
    }
    let out_len = signal.len() + kernel.len() - 1;
    let m = next_pow2(out_len);
    let mut a = vec![Complex64::new(0.0, 0.0); m];
    a[..signal.len()].copy_from_slice(signal);
    let mut b = vec![Complex64::new(0.0, 0.0); m];
    for (dst, &src) in b.iter_mut().zip(kernel) {
        *dst = Complex64::new(src, 0.0);
    }
    fft_forward(&mut a);
    fft_forward(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    fft_inverse(&mut a);
    a.truncate(out_len);
    a
}

/// DFT bin center frequencies in Hz for an `n`-point transform at sample
/// rate `fs`, in natural FFT order (non-negative bins first, then the
/// negative half).
pub fn fft_frequencies(n: usize, fs: f64) -> Vec<f64> {
    let step = fs / n as f64;
    (0..n)
        .map(|i| {
            if i <= (n - 1) / 2 {
                i as f64 * step
            } else {
                (i as f64 - n as f64) * step
            }
        })
        .collect()
}

/// Power spectrum |X(k)|²/N of `x` (no windowing), natural FFT order.
pub fn power_spectrum(x: &[Complex64]) -> Vec<f64> {
    let mut buf = x.to_vec();
    fft_forward(&mut buf);
    let n = x.len().max(1) as f64;
    buf.iter().map(|v| v.norm_sqr() / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_fft_round_trip() {
        let x: Vec<Complex64> = (0..12)
            .map(|i| Complex64::new(i as f64, -(i as f64) * 0.5))
            .collect();
        let mut buf = x.clone();
        fft_forward(&mut buf);
        fft_inverse(&mut buf);
        for (a, b) in buf.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn test_convolution_matches_direct() {
        let signal: Vec<Complex64> = (0..7)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64).cos()))
            .collect();
        let kernel = [0.5, -1.0, 0.25];
        let fast = fft_convolve_full(&signal, &kernel);
        assert_eq!(fast.len(), signal.len() + kernel.len() - 1);
        for (n, out) in fast.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &h) in kernel.iter().enumerate() {
                if n >= k && n - k < signal.len() {
                    acc += signal[n - k] * h;
                }
            }
            assert!((out - acc).norm() < 1e-12, "lag {n}");
        }
    }

    #[test]
    fn test_frequency_grid() {
        let f = fft_frequencies(4, 8.0);
        assert_eq!(f, vec![0.0, 2.0, -4.0, -2.0]);
        let f = fft_frequencies(5, 5.0);
        assert_eq!(f, vec![0.0, 1.0, 2.0, -2.0, -1.0]);
    }

    #[test]
    fn test_power_spectrum_single_tone() {
        let n = 64;
        let x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * 5.0 * i as f64 / n as f64))
            .collect();
        let p = power_spectrum(&x);
        let peak = p
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(peak, 5);
        assert!((p[5] - n as f64).abs() < 1e-9);
    }
}
