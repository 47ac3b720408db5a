//! Pruned radix-2 FFT plans for sparse input/output index sets.
//!
//! Zero-stuffed NOFDM generation runs a large `q = c·N`-point transform in
//! which only `N` inputs are nonzero and only `N` outputs are kept (and the
//! matching demodulation transform has the sparsity mirrored). Most of the
//! radix-2 trellis is therefore dead: butterflies whose inputs are both zero
//! produce nothing, and butterflies feeding only discarded outputs need not
//! run. This module builds an explicit execution plan over the live/needed
//! part of the trellis and reports its cost.
//!
//! Cost convention: a butterfly that combines **two** nonzero values costs one
//! complex multiplication (its twiddle is applied to one arm). A butterfly
//! with a single nonzero input degenerates to a pair of scaled copies; its
//! unit-modulus scale is constant at plan time, so it is folded into the
//! effective twiddles of downstream butterflies and into the final per-output
//! constants, and costs nothing at run time. Additions are counted per
//! computed output that the kept-output set actually depends on. The
//! unpruned baseline under the same convention is `(q/2)·log2(q)`
//! multiplications and `q·log2(q)` additions.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Description of a pruned transform: size, live inputs, kept outputs,
/// direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PruneSpec {
    /// Transform length `q`; must be a power of two.
    pub size: usize,
    /// Indices (natural order) of inputs that may be nonzero.
    pub inputs: Vec<usize>,
    /// Indices (natural order) of outputs that are kept.
    pub outputs: Vec<usize>,
    /// `true` for the inverse kernel e^{+j2πnk/q}, `false` for the forward
    /// kernel e^{−j2πnk/q}. Neither direction applies a 1/q factor; callers
    /// fold their normalization into [`PrunedFftPlan::new_scaled`].
    pub inverse: bool,
}

/// One planned trellis operation.
#[derive(Debug, Clone)]
enum Step {
    /// Full butterfly: `t = w·v[b]; (v[a], v[b]) = (v[a]+t, v[a]−t)`.
    Butterfly { a: usize, b: usize, w: Complex64 },
    /// Scaled-copy butterfly collapsed at plan time: `v[dst] = v[src]`.
    Copy { src: usize, dst: usize },
}

/// An executable pruned FFT plan with its operation counts.
#[derive(Debug, Clone)]
pub struct PrunedFftPlan {
    size: usize,
    log2_size: u32,
    /// Work-array position for each plan input, in `spec.inputs` order.
    input_positions: Vec<usize>,
    steps: Vec<Step>,
    /// `(output slot, work position, merged scale)` for each kept output that
    /// is reachable from a live input.
    output_taps: Vec<(usize, usize, Complex64)>,
    /// Kept outputs that no live input reaches; they are exactly zero.
    zero_outputs: Vec<usize>,
    multiplications: usize,
    additions: usize,
}

impl PrunedFftPlan {
    /// Plan the transform described by `spec` with unit output scale.
    pub fn new(spec: &PruneSpec) -> Result<Self> {
        Self::new_scaled(spec, Complex64::new(1.0, 0.0))
    }

    /// Plan the transform with an extra `scale` merged into every output
    /// constant (e.g. a 1/√N normalization), costing nothing at run time
    /// beyond the per-output constants that exist anyway.
    pub fn new_scaled(spec: &PruneSpec, scale: Complex64) -> Result<Self> {
        let q = spec.size;
        if q < 2 || !q.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "pruned FFT size must be a power of two >= 2, got {q}"
            )));
        }
        let log2_size = q.trailing_zeros();
        validate_indices("inputs", &spec.inputs, q)?;
        validate_indices("outputs", &spec.outputs, q)?;

        // Master twiddle table: tw[j] = exp(sign·j2π·j/q), j in 0..q/2.
        let sign = if spec.inverse { 1.0 } else { -1.0 };
        let tw: Vec<Complex64> = (0..q / 2)
            .map(|j| Complex64::from_polar(1.0, sign * std::f64::consts::TAU * j as f64 / q as f64))
            .collect();

        // Decimation-in-time layout: the work array starts bit-reversed, so
        // input index i sits at position bitrev(i) and stage s pairs positions
        // (p, p + 2^s); outputs land in natural order.
        let stages = log2_size as usize;

        // Backward pass: `needed[s][p]` = the value at position p entering
        // stage s influences some kept output.
        let mut needed = vec![vec![false; q]; stages + 1];
        for &k in &spec.outputs {
            needed[stages][k] = true;
        }
        for s in (0..stages).rev() {
            let m = 1usize << s;
            for block in (0..q).step_by(2 * m) {
                for j in 0..m {
                    let a = block + j;
                    let b = a + m;
                    let d = needed[s + 1][a] || needed[s + 1][b];
                    needed[s][a] = d;
                    needed[s][b] = d;
                }
            }
        }

        // Forward pass: propagate liveness, fold single-input scales, and
        // emit the surviving operations.
        let one = Complex64::new(1.0, 0.0);
        let mut live = vec![false; q];
        let mut sigma = vec![one; q];
        let mut input_positions = Vec::with_capacity(spec.inputs.len());
        for &i in &spec.inputs {
            let p = bit_reverse(i, log2_size);
            live[p] = true;
            input_positions.push(p);
        }

        let mut steps = Vec::new();
        let mut multiplications = 0usize;
        let mut additions = 0usize;
        for s in 0..stages {
            let m = 1usize << s;
            let stride = q >> (s + 1);
            for block in (0..q).step_by(2 * m) {
                for j in 0..m {
                    let a = block + j;
                    let b = a + m;
                    if !(needed[s + 1][a] || needed[s + 1][b]) {
                        // Feeds only discarded outputs; still propagate
                        // liveness so the flags stay consistent.
                        let l = live[a] || live[b];
                        live[a] = l;
                        live[b] = l;
                        continue;
                    }
                    let w = tw[j * stride];
                    match (live[a], live[b]) {
                        (true, true) => {
                            // Fold the arms' accumulated scales into one
                            // effective twiddle so a single multiplication
                            // remains: act[a]±w·act[b] = σa·(v[a]±w_eff·v[b]).
                            let w_eff = w * sigma[b] / sigma[a];
                            steps.push(Step::Butterfly { a, b, w: w_eff });
                            sigma[b] = sigma[a];
                            multiplications += 1;
                            additions += needed[s + 1][a] as usize + needed[s + 1][b] as usize;
                        }
                        (true, false) => {
                            // act[b] is zero: both outputs equal act[a].
                            steps.push(Step::Copy { src: a, dst: b });
                            sigma[b] = sigma[a];
                            live[b] = true;
                        }
                        (false, true) => {
                            // act[a] is zero: outputs are ±w·act[b].
                            steps.push(Step::Copy { src: b, dst: a });
                            sigma[a] = w * sigma[b];
                            sigma[b] = -w * sigma[b];
                            live[a] = true;
                        }
                        (false, false) => {
                            // Structurally zero; nothing to do.
                        }
                    }
                }
            }
        }

        let mut output_taps = Vec::with_capacity(spec.outputs.len());
        let mut zero_outputs = Vec::new();
        for (slot, &k) in spec.outputs.iter().enumerate() {
            if live[k] {
                output_taps.push((slot, k, sigma[k] * scale));
            } else {
                zero_outputs.push(slot);
            }
        }

        Ok(Self {
            size: q,
            log2_size,
            input_positions,
            steps,
            output_taps,
            zero_outputs,
            multiplications,
            additions,
        })
    }

    /// Transform length `q`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// General (two-live-input) butterflies executed per call — the pruned
    /// complex multiplication count.
    pub fn multiplications(&self) -> usize {
        self.multiplications
    }

    /// Complex additions charged per call (one per needed butterfly output).
    pub fn additions(&self) -> usize {
        self.additions
    }

    /// Multiplication count of the unpruned transform under the same
    /// convention: every butterfly runs, `(q/2)·log2(q)`.
    pub fn unpruned_multiplications(&self) -> usize {
        self.size / 2 * self.log2_size as usize
    }

    /// Addition count of the unpruned transform: `q·log2(q)`.
    pub fn unpruned_additions(&self) -> usize {
        self.size * self.log2_size as usize
    }

    /// Execute the plan. `input` values correspond one-to-one (same order) to
    /// the spec's `inputs`; `output` receives one value per spec `outputs`
    /// entry and is resized accordingly.
    pub fn apply(&self, input: &[Complex64], output: &mut Vec<Complex64>) -> Result<()> {
        if input.len() != self.input_positions.len() {
            return Err(Error::SizeMismatch {
                context: "pruned FFT input",
                expected: self.input_positions.len(),
                actual: input.len(),
            });
        }
        let mut v = vec![Complex64::new(0.0, 0.0); self.size];
        for (&p, &value) in self.input_positions.iter().zip(input) {
            v[p] = value;
        }
        for step in &self.steps {
            match *step {
                Step::Butterfly { a, b, w } => {
                    let t = w * v[b];
                    let u = v[a];
                    v[a] = u + t;
                    v[b] = u - t;
                }
                Step::Copy { src, dst } => v[dst] = v[src],
            }
        }
        output.clear();
        output.resize(self.output_taps.len() + self.zero_outputs.len(), Complex64::new(0.0, 0.0));
        for &(slot, p, scale) in &self.output_taps {
            output[slot] = scale * v[p];
        }
        Ok(())
    }
}

fn validate_indices(what: &str, idx: &[usize], q: usize) -> Result<()> {
    if idx.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "pruned FFT {what} set must not be empty"
        )));
    }
    let mut seen = vec![false; q];
    for &i in idx {
        if i >= q {
            return Err(Error::InvalidConfig(format!(
                "pruned FFT {what} index {i} out of range for size {q}"
            )));
        }
        if seen[i] {
            return Err(Error::InvalidConfig(format!(
                "pruned FFT {what} index {i} repeated"
            )));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Reverse the low `bits` bits of `i`.
fn bit_reverse(i: usize, bits: u32) -> usize {
    i.reverse_bits() >> (usize::BITS - bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference DFT by direct summation.
    fn dft_direct(x: &[Complex64], inverse: bool) -> Vec<Complex64> {
        let q = x.len();
        let sign = if inverse { 1.0 } else { -1.0 };
        (0..q)
            .map(|k| {
                (0..q)
                    .map(|n| {
                        x[n] * Complex64::from_polar(
                            1.0,
                            sign * std::f64::consts::TAU * (n * k % q) as f64 / q as f64,
                        )
                    })
                    .sum()
            })
            .collect()
    }

    fn test_vector(seed: u64, len: usize) -> Vec<Complex64> {
        // Small deterministic pseudo-random values; no RNG dependency needed.
        (0..len as u64)
            .map(|i| {
                let s = seed
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(i.wrapping_mul(1442695040888963407));
                let t = seed
                    .wrapping_mul(2862933555777941757)
                    .wrapping_add(i.wrapping_mul(3037000493));
                let a = (s >> 11) as f64 / (1u64 << 53) as f64;
                let b = (t >> 11) as f64 / (1u64 << 53) as f64;
                Complex64::new(2.0 * a - 1.0, 2.0 * b - 1.0)
            })
            .collect()
    }

    #[test]
    fn test_full_plan_matches_direct_dft() {
        for &inverse in &[false, true] {
            for &q in &[4usize, 16, 64] {
                let spec = PruneSpec {
                    size: q,
                    inputs: (0..q).collect(),
                    outputs: (0..q).collect(),
                    inverse,
                };
                let plan = PrunedFftPlan::new(&spec).unwrap();
                let x = test_vector(7, q);
                let mut got = Vec::new();
                plan.apply(&x, &mut got).unwrap();
                let want = dft_direct(&x, inverse);
                for (g, w) in got.iter().zip(&want) {
                    assert!((g - w).norm() < 1e-9 * q as f64);
                }
                // Full plan executes every butterfly.
                assert_eq!(plan.multiplications(), plan.unpruned_multiplications());
            }
        }
    }

    #[test]
    fn test_sparse_plan_matches_direct_dft() {
        // 8 scattered nonzero inputs, first 8 outputs of a 64-point inverse
        // transform: the zero-stuffed NOFDM generation pattern.
        let q = 64;
        let inputs: Vec<usize> = (0..8).map(|k| k * 7).collect();
        let spec = PruneSpec {
            size: q,
            inputs: inputs.clone(),
            outputs: (0..8).collect(),
            inverse: true,
        };
        let plan = PrunedFftPlan::new(&spec).unwrap();
        let vals = test_vector(3, 8);
        let mut full = vec![Complex64::new(0.0, 0.0); q];
        for (&i, &v) in inputs.iter().zip(&vals) {
            full[i] = v;
        }
        let want = dft_direct(&full, true);
        let mut got = Vec::new();
        plan.apply(&vals, &mut got).unwrap();
        for (g, w) in got.iter().zip(want.iter().take(8)) {
            assert!((g - w).norm() < 1e-10 * q as f64);
        }
    }

    #[test]
    fn test_scattered_output_plan_matches_direct_dft() {
        // Mirror direction: dense first-8 inputs, scattered outputs (the
        // demodulation pattern), forward kernel.
        let q = 64;
        let outputs: Vec<usize> = (0..8).map(|k| k * 7).collect();
        let spec = PruneSpec {
            size: q,
            inputs: (0..8).collect(),
            outputs: outputs.clone(),
            inverse: false,
        };
        let plan = PrunedFftPlan::new(&spec).unwrap();
        let vals = test_vector(11, 8);
        let mut full = vec![Complex64::new(0.0, 0.0); q];
        full[..8].copy_from_slice(&vals);
        let want = dft_direct(&full, false);
        let mut got = Vec::new();
        plan.apply(&vals, &mut got).unwrap();
        for (slot, &k) in outputs.iter().enumerate() {
            assert!((got[slot] - want[k]).norm() < 1e-10 * q as f64);
        }
    }

    #[test]
    fn test_output_scale_is_merged() {
        let spec = PruneSpec {
            size: 8,
            inputs: (0..8).collect(),
            outputs: (0..8).collect(),
            inverse: true,
        };
        let s = Complex64::new(0.25, 0.0);
        let unit = PrunedFftPlan::new(&spec).unwrap();
        let scaled = PrunedFftPlan::new_scaled(&spec, s).unwrap();
        let x = test_vector(5, 8);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        unit.apply(&x, &mut a).unwrap();
        scaled.apply(&x, &mut b).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u * s - v).norm() < 1e-12);
        }
        assert_eq!(unit.multiplications(), scaled.multiplications());
    }

    #[test]
    fn test_degenerate_input_rejected() {
        let bad = PruneSpec {
            size: 12, // not a power of two
            inputs: vec![0],
            outputs: vec![0],
            inverse: false,
        };
        assert!(PrunedFftPlan::new(&bad).is_err());
        let dup = PruneSpec {
            size: 8,
            inputs: vec![1, 1],
            outputs: vec![0],
            inverse: false,
        };
        assert!(PrunedFftPlan::new(&dup).is_err());
    }
}
