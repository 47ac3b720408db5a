//! Widely linear 2×2 time-domain MIMO equalizer with stochastic-gradient
//! (LMS) adaptation, shared by the data-aided training pass and the
//! decision-directed payload pass.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The four tap vectors, the step size, and the carrier-phase estimate the
/// update rule compensates. Serializable so a long run can checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualizerState {
    /// Taps mapping received X onto output X.
    pub taps_xx: Vec<Complex64>,
    /// Taps mapping received Y onto output X.
    pub taps_xy: Vec<Complex64>,
    /// Taps mapping received X onto output Y.
    pub taps_yx: Vec<Complex64>,
    /// Taps mapping received Y onto output Y.
    pub taps_yy: Vec<Complex64>,
    /// LMS step size.
    pub mu: f64,
    /// Carrier phase θ applied as e^{−jθ} between the filter and the
    /// decision device; updates de-rotate the gradient by the same factor.
    pub theta: f64,
}

impl EqualizerState {
    /// Fresh state: `span` taps per branch, the two direct branches
    /// initialized to a center spike.
    pub fn center_spike(span: usize, mu: f64) -> Result<Self> {
        if span == 0 || span % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "equalizer span must be odd so the cursor is centered, got {span}"
            )));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "equalizer step size must be positive and finite, got {mu}"
            )));
        }
        let zero = vec![Complex64::new(0.0, 0.0); span];
        let mut spike = zero.clone();
        spike[span / 2] = Complex64::new(1.0, 0.0);
        Ok(Self {
            taps_xx: spike.clone(),
            taps_xy: zero.clone(),
            taps_yx: zero,
            taps_yy: spike,
            mu,
            theta: 0.0,
        })
    }

    /// Taps per branch.
    pub fn span(&self) -> usize {
        self.taps_xx.len()
    }

    /// Filter outputs at center position `at`:
    /// `p_X = Σ_k ω*_XX(k)·r_X(at+k−h) + Σ_k ω*_XY(k)·r_Y(at+k−h)` and the
    /// mirrored expression for Y, with h the half-span. Samples outside the
    /// input read as zero.
    pub fn output_at(
        &self,
        rx: &[Complex64],
        ry: &[Complex64],
        at: usize,
    ) -> (Complex64, Complex64) {
        let span = self.span();
        let h = (span / 2) as isize;
        let mut px = Complex64::new(0.0, 0.0);
        let mut py = Complex64::new(0.0, 0.0);
        for k in 0..span {
            let idx = at as isize + k as isize - h;
            if idx < 0 {
                continue;
            }
            let idx = idx as usize;
            let sx = if idx < rx.len() { rx[idx] } else { Complex64::new(0.0, 0.0) };
            let sy = if idx < ry.len() { ry[idx] } else { Complex64::new(0.0, 0.0) };
            px += self.taps_xx[k].conj() * sx + self.taps_xy[k].conj() * sy;
            py += self.taps_yx[k].conj() * sx + self.taps_yy[k].conj() * sy;
        }
        (px, py)
    }

    /// Decision-domain outputs `s = e^{−jθ}·p`.
    pub fn decision_output_at(
        &self,
        rx: &[Complex64],
        ry: &[Complex64],
        at: usize,
    ) -> (Complex64, Complex64) {
        let (px, py) = self.output_at(rx, ry, at);
        let g = Complex64::from_polar(1.0, -self.theta);
        (g * px, g * py)
    }

    /// One stochastic-gradient step at `at`, given the decision-domain
    /// errors `ε = d − s` for each output polarization:
    ///
    /// `ω_•X ← ω_•X + μ·e^{−jθ}·ε*_X·r_•` (and likewise for Y), which
    /// descends |s − d|² with respect to the taps.
    pub fn update_at(
        &mut self,
        rx: &[Complex64],
        ry: &[Complex64],
        at: usize,
        err_x: Complex64,
        err_y: Complex64,
    ) {
        let span = self.span();
        let h = (span / 2) as isize;
        let g = Complex64::from_polar(1.0, -self.theta) * self.mu;
        let cx = g * err_x.conj();
        let cy = g * err_y.conj();
        for k in 0..span {
            let idx = at as isize + k as isize - h;
            if idx < 0 {
                continue;
            }
            let idx = idx as usize;
            let sx = if idx < rx.len() { rx[idx] } else { Complex64::new(0.0, 0.0) };
            let sy = if idx < ry.len() { ry[idx] } else { Complex64::new(0.0, 0.0) };
            self.taps_xx[k] += cx * sx;
            self.taps_xy[k] += cx * sy;
            self.taps_yx[k] += cy * sx;
            self.taps_yy[k] += cy * sy;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tx::map::{map_qpsk, nearest_qpsk};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use rand_distr::StandardNormal;

    fn qpsk_stream(rng: &mut ChaCha12Rng, n: usize) -> Vec<Complex64> {
        let bits: Vec<u8> = (0..2 * n).map(|_| rng.random_range(0..2u8)).collect();
        map_qpsk(&bits).unwrap()
    }

    #[test]
    fn test_center_spike_is_transparent() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let rx = qpsk_stream(&mut rng, 64);
        let ry = qpsk_stream(&mut rng, 64);
        let state = EqualizerState::center_spike(25, 1e-3).unwrap();
        for at in 12..52 {
            let (px, py) = state.output_at(&rx, &ry, at);
            assert!((px - rx[at]).norm() < 1e-15);
            assert!((py - ry[at]).norm() < 1e-15);
        }
    }

    #[test]
    fn test_cross_spikes_unswap_polarizations() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let tx = qpsk_stream(&mut rng, 64);
        let ty = qpsk_stream(&mut rng, 64);
        // The channel swapped the polarizations.
        let mut state = EqualizerState::center_spike(5, 1e-3).unwrap();
        state.taps_xx[2] = Complex64::new(0.0, 0.0);
        state.taps_yy[2] = Complex64::new(0.0, 0.0);
        state.taps_xy[2] = Complex64::new(1.0, 0.0);
        state.taps_yx[2] = Complex64::new(1.0, 0.0);
        for at in 4..60 {
            let (px, py) = state.output_at(&ty, &tx, at);
            assert!((px - tx[at]).norm() < 1e-15);
            assert!((py - ty[at]).norm() < 1e-15);
        }
    }

    #[test]
    fn test_single_tap_update_arithmetic() {
        // ω = 0, r = 1, d = 1, θ = 0, μ = 0.1:
        // ε = d − s = 1, so ω ← 0.1 and the next output moves toward d.
        let mut state = EqualizerState::center_spike(1, 0.1).unwrap();
        state.taps_xx[0] = Complex64::new(0.0, 0.0);
        state.taps_yy[0] = Complex64::new(0.0, 0.0);
        let r = [Complex64::new(1.0, 0.0)];
        let (sx, sy) = state.decision_output_at(&r, &r, 0);
        assert!(sx.norm() < 1e-15 && sy.norm() < 1e-15);
        let d = Complex64::new(1.0, 0.0);
        state.update_at(&r, &r, 0, d - sx, d - sy);
        assert!((state.taps_xx[0] - Complex64::new(0.1, 0.0)).norm() < 1e-15);
        let (sx2, _) = state.decision_output_at(&r, &r, 0);
        // taps_xx and taps_xy each moved by 0.1 and both see r = 1.
        assert!((sx2 - Complex64::new(0.2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn test_zero_error_leaves_taps_unchanged() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let rx = qpsk_stream(&mut rng, 32);
        let ry = qpsk_stream(&mut rng, 32);
        let mut state = EqualizerState::center_spike(7, 1e-2).unwrap();
        let before = state.clone();
        let zero = Complex64::new(0.0, 0.0);
        state.update_at(&rx, &ry, 16, zero, zero);
        assert_eq!(state, before);
    }

    #[test]
    fn test_converges_on_mixed_polarizations() {
        // Static unitary polarization mixing plus noise; data-aided LMS (the
        // training-sequence regime) must drive the MSE below −25 dB, with
        // block averages decreasing essentially monotonically.
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let n = 10_000;
        let tx = qpsk_stream(&mut rng, n);
        let ty = qpsk_stream(&mut rng, n);
        let phi: f64 = 0.7;
        let noise = |rng: &mut ChaCha12Rng| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * 0.02
        };
        let mut rx = Vec::with_capacity(n);
        let mut ry = Vec::with_capacity(n);
        for i in 0..n {
            rx.push(phi.cos() * tx[i] + phi.sin() * ty[i] + noise(&mut rng));
            ry.push(-phi.sin() * tx[i] + phi.cos() * ty[i] + noise(&mut rng));
        }
        let mut state = EqualizerState::center_spike(5, 2e-3).unwrap();
        let mut seg_mse = Vec::new();
        let seg = 2000;
        let mut acc = 0.0;
        for at in 0..n {
            let (sx, sy) = state.decision_output_at(&rx, &ry, at);
            let ex = tx[at] - sx;
            let ey = ty[at] - sy;
            acc += ex.norm_sqr() + ey.norm_sqr();
            state.update_at(&rx, &ry, at, ex, ey);
            if (at + 1) % seg == 0 {
                seg_mse.push(acc / (2.0 * seg as f64));
                acc = 0.0;
            }
        }
        for w in seg_mse.windows(2) {
            assert!(w[1] < w[0] * 1.05, "MSE rose: {seg_mse:?}");
        }
        let final_mse = *seg_mse.last().unwrap();
        assert!(
            final_mse < 10f64.powf(-2.5),
            "final MSE {final_mse} (−25 dB not reached): {seg_mse:?}"
        );
        // Decisions on the settled output match the sent data.
        let errors = (n - seg..n)
            .filter(|&at| {
                let (sx, sy) = state.decision_output_at(&rx, &ry, at);
                nearest_qpsk(sx) != nearest_qpsk(tx[at]) || nearest_qpsk(sy) != nearest_qpsk(ty[at])
            })
            .count();
        assert_eq!(errors, 0);
    }

    #[test]
    fn test_phase_compensated_update_tracks_rotation() {
        // A pure common rotation of the received signal must be absorbed by
        // θ (not the taps): with θ set correctly, data-aided errors vanish.
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let tx = qpsk_stream(&mut rng, 32);
        let rot = Complex64::from_polar(1.0, 0.4);
        let rx: Vec<Complex64> = tx.iter().map(|v| v * rot).collect();
        let mut state = EqualizerState::center_spike(1, 1e-2).unwrap();
        state.theta = 0.4;
        let (sx, _) = state.decision_output_at(&rx, &rx, 10);
        assert!((sx - tx[10]).norm() < 1e-12);
    }

    #[test]
    fn test_state_validation_and_serde() {
        assert!(EqualizerState::center_spike(0, 1e-3).is_err());
        assert!(EqualizerState::center_spike(24, 1e-3).is_err());
        assert!(EqualizerState::center_spike(25, 0.0).is_err());
        assert!(EqualizerState::center_spike(25, f64::NAN).is_err());
        let state = EqualizerState::center_spike(5, 1e-3).unwrap();
        let json = serde_json::to_string(&state).unwrap();
        let back: EqualizerState = serde_json::from_str(&json).unwrap();
        assert_eq!(back, state);
    }
}
