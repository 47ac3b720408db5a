//! Non-orthogonal FDM modulation and demodulation.
//!
//! Subcarriers are spaced at a fraction α = b/c < 1 of the orthogonal
//! spacing, so the N×N modulation matrix is A_{n,k} = (1/√N)·e^{j2πnkα/N}
//! and the matched receiver bank is A^H. Because α is rational, the
//! modulation also equals a c·N-point inverse FFT over a zero-stuffed
//! spectrum, which admits heavy pruning (see [`pruned`]); the equivalent
//! multi-IFFT decomposition trades that one large transform for c small
//! ones plus phase rotations. All three generation routes are implemented
//! and agree to floating-point accuracy; the direct summation is the oracle.

pub mod pruned;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use pruned::{PruneSpec, PrunedFftPlan};

/// Rational subcarrier compression factor α = b/c, 0 < α ≤ 1.
///
/// Stored in lowest terms; `7/8` means subcarriers are packed at 7/8 of the
/// orthogonal spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressionFactor {
    b: u32,
    c: u32,
}

impl CompressionFactor {
    /// Build α = b/c. Requires 1 ≤ b ≤ c; the fraction is reduced.
    pub fn new(b: u32, c: u32) -> Result<Self> {
        if b == 0 || c == 0 {
            return Err(Error::InvalidConfig(format!(
                "compression factor {b}/{c} must have positive terms"
            )));
        }
        if b > c {
            return Err(Error::InvalidConfig(format!(
                "compression factor {b}/{c} exceeds 1; subcarrier spacing can only be compressed"
            )));
        }
        let g = gcd(b, c);
        Ok(Self { b: b / g, c: c / g })
    }

    /// Orthogonal spacing (α = 1).
    pub fn unity() -> Self {
        Self { b: 1, c: 1 }
    }

    /// Numerator of the reduced fraction.
    pub fn numerator(&self) -> u32 {
        self.b
    }

    /// Denominator of the reduced fraction.
    pub fn denominator(&self) -> u32 {
        self.c
    }

    /// α as a float.
    pub fn alpha(&self) -> f64 {
        self.b as f64 / self.c as f64
    }

    /// True for α = 1 (ordinary orthogonal multiplexing).
    pub fn is_unity(&self) -> bool {
        self.b == self.c
    }
}

impl std::fmt::Display for CompressionFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.b, self.c)
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Direct O(N²) evaluation of the compressed-spacing inverse transform:
/// x_n = (1/√N)·Σ_k X_k e^{j2πnkα/N}. This is the reference ("oracle")
/// implementation the faster routes are tested against.
pub fn ifrft_direct(symbols: &[Complex64], cf: CompressionFactor) -> Result<Vec<Complex64>> {
    let n = symbols.len();
    if n == 0 {
        return Err(Error::InvalidConfig(
            "ifrft_direct needs at least one subcarrier".into(),
        ));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let alpha = cf.alpha();
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &x) in symbols.iter().enumerate() {
            let phase = std::f64::consts::TAU * (t * k) as f64 * alpha / n as f64;
            acc += x * Complex64::from_polar(1.0, phase);
        }
        out.push(acc * scale);
    }
    Ok(out)
}

/// Matched demodulation by direct summation: X_k = (1/√N)·Σ_n x_n e^{−j2πnkα/N},
/// i.e. A^H applied to one symbol of N time samples.
pub fn demodulate_direct(samples: &[Complex64], cf: CompressionFactor) -> Result<Vec<Complex64>> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::InvalidConfig(
            "demodulate_direct needs at least one sample".into(),
        ));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let alpha = cf.alpha();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, &x) in samples.iter().enumerate() {
            let phase = -std::f64::consts::TAU * (t * k) as f64 * alpha / n as f64;
            acc += x * Complex64::from_polar(1.0, phase);
        }
        out.push(acc * scale);
    }
    Ok(out)
}

/// Zero-stuffed route: embed the N symbols at indices {0, b, 2b, …} of a
/// c·N-point spectrum and take the first N outputs of its inverse transform
/// (scaled 1/√N). When c·N is a power of two this runs on a pruned radix-2
/// plan; otherwise it falls back to direct evaluation (and the fast-path op
/// count is unavailable).
pub fn nofdm_mod_cn_ifft(symbols: &[Complex64], cf: CompressionFactor) -> Result<Vec<Complex64>> {
    let n = symbols.len();
    if n == 0 {
        return Err(Error::InvalidConfig(
            "nofdm_mod_cn_ifft needs at least one subcarrier".into(),
        ));
    }
    let q = n * cf.denominator() as usize;
    if !q.is_power_of_two() || q < 2 {
        return ifrft_direct(symbols, cf);
    }
    let plan = PrunedFftPlan::new_scaled(
        &modulation_prune_spec(n, cf),
        Complex64::new(1.0 / (n as f64).sqrt(), 0.0),
    )?;
    let mut out = Vec::new();
    plan.apply(symbols, &mut out)?;
    Ok(out)
}

/// Multi-IFFT route: split the zero-stuffed c·N spectrum by residue mod c
/// into c subsequences, inverse-transform each at length N, phase-rotate by
/// e^{j2πni/(cN)} and sum. Agrees with [`ifrft_direct`] for any b/c.
pub fn nofdm_mod_multi_ifft(symbols: &[Complex64], cf: CompressionFactor) -> Result<Vec<Complex64>> {
    let n = symbols.len();
    if n == 0 {
        return Err(Error::InvalidConfig(
            "nofdm_mod_multi_ifft needs at least one subcarrier".into(),
        ));
    }
    let b = cf.numerator() as usize;
    let c = cf.denominator() as usize;
    let q = n * c;
    let scale = 1.0 / (n as f64).sqrt();
    // Zero-stuffed spectrum Y[k·b] = X_k, then residue split Z_i[m] = Y[i+mc].
    let mut stuffed = vec![Complex64::new(0.0, 0.0); q];
    for (k, &x) in symbols.iter().enumerate() {
        stuffed[k * b] = x;
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut residue = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..c {
        let mut any = false;
        for m in 0..n {
            residue[m] = stuffed[i + m * c];
            any |= residue[m].norm_sqr() != 0.0;
        }
        if !any {
            continue;
        }
        // Small N-point inverse DFT of the residue subsequence, direct form;
        // these transforms are the textbook decomposition and are not the
        // fast path, so clarity wins over speed.
        for t in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, &z) in residue.iter().enumerate() {
                let phase = std::f64::consts::TAU * (t * m % n) as f64 / n as f64;
                acc += z * Complex64::from_polar(1.0, phase);
            }
            let rot = Complex64::from_polar(1.0, std::f64::consts::TAU * (t * i) as f64 / q as f64);
            out[t] += rot * acc;
        }
    }
    for v in &mut out {
        *v *= scale;
    }
    Ok(out)
}

/// The sparsity pattern of the zero-stuffed modulation transform.
fn modulation_prune_spec(n: usize, cf: CompressionFactor) -> PruneSpec {
    let b = cf.numerator() as usize;
    PruneSpec {
        size: n * cf.denominator() as usize,
        inputs: (0..n).map(|k| k * b).collect(),
        outputs: (0..n).collect(),
        inverse: true,
    }
}

/// The mirrored pattern of the matched forward (demodulation) transform.
fn demodulation_prune_spec(n: usize, cf: CompressionFactor) -> PruneSpec {
    let b = cf.numerator() as usize;
    PruneSpec {
        size: n * cf.denominator() as usize,
        inputs: (0..n).collect(),
        outputs: (0..n).map(|k| k * b).collect(),
        inverse: false,
    }
}

/// Complex operation count of one symbol generation/demodulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCount {
    pub complex_mults: usize,
    pub complex_adds: usize,
}

/// Symbol-generation scheme selector for [`count_ops`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenScheme {
    /// Direct O(N²) matrix evaluation.
    Direct,
    /// Zero-stuffed c·N-point inverse FFT, no pruning (closed-form upper bound).
    ZeroStuffedIfft,
    /// c small IFFTs plus rotations (closed-form upper bound).
    MultiIfft,
    /// Zero-stuffed route on the pruned trellis (measured count).
    PrunedIfft,
}

/// Closed-form (or, for the pruned scheme, measured) complex operation counts
/// for generating one N-subcarrier symbol. FFT-based schemes require the
/// relevant transform sizes to be powers of two.
pub fn count_ops(scheme: GenScheme, n: usize, cf: CompressionFactor) -> Result<OpCount> {
    if n == 0 {
        return Err(Error::InvalidConfig("count_ops needs N >= 1".into()));
    }
    let c = cf.denominator() as usize;
    let q = n * c;
    match scheme {
        GenScheme::Direct => Ok(OpCount {
            complex_mults: n * n,
            complex_adds: n * (n - 1),
        }),
        GenScheme::ZeroStuffedIfft => {
            let lq = pow2_log2("cN", q)?;
            Ok(OpCount {
                complex_mults: q / 2 * lq,
                complex_adds: q * lq,
            })
        }
        GenScheme::MultiIfft => {
            let ln = pow2_log2("N", n)?;
            Ok(OpCount {
                complex_mults: q / 2 * ln + q,
                complex_adds: q * ln + (c - 1) * n,
            })
        }
        GenScheme::PrunedIfft => {
            pow2_log2("cN", q)?;
            let plan = PrunedFftPlan::new(&modulation_prune_spec(n, cf))?;
            Ok(OpCount {
                complex_mults: plan.multiplications(),
                complex_adds: plan.additions(),
            })
        }
    }
}

fn pow2_log2(what: &str, v: usize) -> Result<usize> {
    if v < 2 || !v.is_power_of_two() {
        return Err(Error::InvalidConfig(format!(
            "{what} = {v} is not a power of two; FFT-based op counts unsupported"
        )));
    }
    Ok(v.trailing_zeros() as usize)
}

/// Fraction of trellis stages saved by input+output pruning of a radix-2
/// transform, per the closed-form two-branch expression in terms of
/// Q = log2(size), I = log2(#live inputs), O = log2(#kept outputs).
pub fn prune_savings(spec: &PruneSpec) -> Result<f64> {
    if spec.size < 2 || !spec.size.is_power_of_two() {
        return Err(Error::InvalidConfig(format!(
            "prune_savings needs a power-of-two size >= 2, got {}",
            spec.size
        )));
    }
    if spec.inputs.is_empty() || spec.outputs.is_empty() {
        return Err(Error::InvalidConfig(
            "prune_savings needs nonempty input and output sets".into(),
        ));
    }
    let q = (spec.size as f64).log2();
    let i = (spec.inputs.len() as f64).log2();
    let o = (spec.outputs.len() as f64).log2();
    let ts = if i + o >= q {
        (2.0 * q - i - o - 2.0 * (1.0 - (o - q).exp2())) / q
    } else {
        (q - i - (i + 1.0 - q).exp2() * (1.0 - o.exp2())) / q
    };
    Ok(ts)
}

/// The N×N inter-subcarrier interference matrix C = A^H·A of the compressed
/// transform pair. Hermitian with unit diagonal; the identity at α = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceMatrix {
    n: usize,
    /// Row-major entries, `data[r*n + c]`.
    data: Vec<Complex64>,
}

/// Build the interference matrix for N subcarriers at compression α = b/c.
pub fn interference_matrix(n: usize, cf: CompressionFactor) -> Result<InterferenceMatrix> {
    InterferenceMatrix::new(n, cf)
}

impl InterferenceMatrix {
    /// Compute C_{k,l} = (1/N)·Σ_n e^{j2πnα(l−k)/N} by direct summation.
    pub fn new(n: usize, cf: CompressionFactor) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig(
                "interference matrix needs N >= 1".into(),
            ));
        }
        let alpha = cf.alpha();
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for k in 0..n {
            for l in 0..n {
                let d = l as f64 - k as f64;
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..n {
                    let phase = std::f64::consts::TAU * t as f64 * alpha * d / n as f64;
                    acc += Complex64::from_polar(1.0, phase);
                }
                data[k * n + l] = acc / n as f64;
            }
        }
        Ok(Self { n, data })
    }

    /// Matrix dimension N.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry C_{row,col}.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.n + col]
    }

    /// C·x for one symbol vector.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(x)?;
        let mut out = Vec::with_capacity(self.n);
        for r in 0..self.n {
            let row = &self.data[r * self.n..(r + 1) * self.n];
            out.push(row.iter().zip(x).map(|(c, v)| c * v).sum());
        }
        Ok(out)
    }

    /// (C − I)·x — the pure interference component used by the cancellation
    /// iterations.
    pub fn apply_off_diagonal(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = self.apply(x)?;
        for (o, v) in out.iter_mut().zip(x) {
            *o -= v;
        }
        Ok(out)
    }

    /// Spectral radius of (C − I), estimated by power iteration. Must be
    /// below 1 for the interference-cancellation fixed point to be
    /// contractive when decisions are correct.
    pub fn off_diagonal_spectral_radius(&self) -> f64 {
        let n = self.n;
        // Deterministic non-degenerate start vector.
        let mut v: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + i as f64 * 0.37, 0.11 * i as f64 - 0.2))
            .collect();
        let mut radius = 0.0;
        for _ in 0..200 {
            let w = self
                .apply_off_diagonal(&v)
                .expect("dimension fixed by construction");
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            radius = norm / v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v = w.iter().map(|z| z / norm).collect();
        }
        radius
    }

    fn check_len(&self, x: &[Complex64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::SizeMismatch {
                context: "interference matrix apply",
                expected: self.n,
                actual: x.len(),
            });
        }
        Ok(())
    }
}

/// Reusable modulator for one (N, α) working point. Uses the pruned
/// zero-stuffed plan when c·N is a power of two, direct evaluation otherwise.
#[derive(Debug, Clone)]
pub struct NofdmModulator {
    n: usize,
    cf: CompressionFactor,
    plan: Option<PrunedFftPlan>,
}

impl NofdmModulator {
    pub fn new(n: usize, cf: CompressionFactor) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("modulator needs N >= 1".into()));
        }
        let q = n * cf.denominator() as usize;
        let plan = if q.is_power_of_two() && q >= 2 {
            Some(PrunedFftPlan::new_scaled(
                &modulation_prune_spec(n, cf),
                Complex64::new(1.0 / (n as f64).sqrt(), 0.0),
            )?)
        } else {
            None
        };
        Ok(Self { n, cf, plan })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn compression(&self) -> CompressionFactor {
        self.cf
    }

    /// One symbol: N subcarrier values → N time samples.
    pub fn modulate(&self, symbols: &[Complex64]) -> Result<Vec<Complex64>> {
        if symbols.len() != self.n {
            return Err(Error::SizeMismatch {
                context: "modulate",
                expected: self.n,
                actual: symbols.len(),
            });
        }
        match &self.plan {
            Some(plan) => {
                let mut out = Vec::new();
                plan.apply(symbols, &mut out)?;
                Ok(out)
            }
            None => ifrft_direct(symbols, self.cf),
        }
    }

    /// Measured per-symbol cost of the fast path; `None` when running on the
    /// direct fallback.
    pub fn op_count(&self) -> Option<OpCount> {
        self.plan.as_ref().map(|p| OpCount {
            complex_mults: p.multiplications(),
            complex_adds: p.additions(),
        })
    }
}

/// Reusable matched demodulator (A^H) for one (N, α) working point,
/// mirroring [`NofdmModulator`]'s fast/fallback split.
#[derive(Debug, Clone)]
pub struct NofdmDemodulator {
    n: usize,
    cf: CompressionFactor,
    plan: Option<PrunedFftPlan>,
}

impl NofdmDemodulator {
    pub fn new(n: usize, cf: CompressionFactor) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("demodulator needs N >= 1".into()));
        }
        let q = n * cf.denominator() as usize;
        let plan = if q.is_power_of_two() && q >= 2 {
            Some(PrunedFftPlan::new_scaled(
                &demodulation_prune_spec(n, cf),
                Complex64::new(1.0 / (n as f64).sqrt(), 0.0),
            )?)
        } else {
            None
        };
        Ok(Self { n, cf, plan })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// One symbol: N time samples → N subcarrier values.
    pub fn demodulate(&self, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        if samples.len() != self.n {
            return Err(Error::SizeMismatch {
                context: "demodulate",
                expected: self.n,
                actual: samples.len(),
            });
        }
        match &self.plan {
            Some(plan) => {
                let mut out = Vec::new();
                plan.apply(samples, &mut out)?;
                Ok(out)
            }
            None => demodulate_direct(samples, self.cf),
        }
    }

    /// Measured per-symbol cost of the fast path.
    pub fn op_count(&self) -> Option<OpCount> {
        self.plan.as_ref().map(|p| OpCount {
            complex_mults: p.multiplications(),
            complex_adds: p.additions(),
        })
    }
}

/// Convenience wrapper: demodulate one symbol with a throwaway plan.
pub fn nofdm_demod(samples: &[Complex64], cf: CompressionFactor) -> Result<Vec<Complex64>> {
    NofdmDemodulator::new(samples.len(), cf)?.demodulate(samples)
}

/// Per-sample rotations that center the subcarrier comb around DC.
///
/// The synthesis basis places subcarrier `k` at `k·α/N` cycles/sample, so
/// the multiplex sits one-sided and its upper carriers alias once the
/// stream is interpolated to an analog-style waveform. Multiplying each
/// block by these rotations moves carrier `k` to `(k·α − m)/N` with
/// `m = round((N−1)·α/2)`, which packs the comb contiguously around DC for
/// any α ∈ (0, 1]. Because `m` is an integer, the shift advances a whole
/// number of cycles per block: every block sees the identical rotation
/// vector, and block-aligned correlations are unaffected. The receiver
/// applies the conjugate before demodulation.
pub fn centering_shift(n: usize, cf: CompressionFactor) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::InvalidConfig(
            "centering shift needs at least one subcarrier".into(),
        ));
    }
    let m = ((n as f64 - 1.0) * cf.alpha() / 2.0).round();
    let w = -2.0 * std::f64::consts::PI * m / n as f64;
    Ok((0..n)
        .map(|i| Complex64::from_polar(1.0, w * i as f64))
        .collect())
}
