//! Rate-5/6 quasi-cyclic LDPC code: construction, systematic encoding,
//! sum-product decoding and the split ("segment") decoding budget used by
//! FEC-assisted interference cancellation.
//!
//! The parity-check matrix is built from a 4×24 base of z×z circulant
//! permutations (z = n/24): 20 information columns of weight 3 with
//! deterministically chosen shifts (greedily adjusted so the expanded graph
//! contains no 4-cycles) and a dual-diagonal parity tail that makes
//! encoding a short back-substitution. Rate is 20/24 = 5/6, i.e. 20%
//! overhead.

pub mod alist;
pub mod decode;

use num_complex::Complex64;

use crate::error::{Error, Result};
pub use alist::SparseBinaryMatrix;
pub use decode::{DecodeResult, SumProductDecoder};

/// Number of block-columns in the base matrix.
const BASE_COLS: usize = 24;
/// Number of block-rows (parity blocks).
const BASE_ROWS: usize = 4;
/// Block-columns carrying information bits.
const INFO_COLS: usize = 20;

/// A rate-5/6 quasi-cyclic LDPC code with its decoder.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    z: usize,
    n: usize,
    k: usize,
    /// base[r][c] = circulant shift, or None for a zero block.
    base: [[Option<usize>; BASE_COLS]; BASE_ROWS],
    h: SparseBinaryMatrix,
    decoder: SumProductDecoder,
}

impl LdpcCode {
    /// Construct the rate-5/6 code of block length `n` (default scenario
    /// value 9600). `n` must be a multiple of 24 with a circulant size of at
    /// least 8.
    pub fn rate_5_6(n: usize) -> Result<Self> {
        if n % BASE_COLS != 0 {
            return Err(Error::InvalidConfig(format!(
                "LDPC block length {n} must be a multiple of {BASE_COLS}"
            )));
        }
        let z = n / BASE_COLS;
        if z < 8 {
            return Err(Error::InvalidConfig(format!(
                "LDPC circulant size {z} too small; need at least 8"
            )));
        }
        let base = build_base(z);
        let h = expand_base(&base, z)?;
        let decoder = SumProductDecoder::new(&h);
        Ok(Self {
            z,
            n,
            k: INFO_COLS * z,
            base,
            h,
            decoder,
        })
    }

    /// Code bits per block.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Information bits per block.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Circulant size.
    pub fn z(&self) -> usize {
        self.z
    }

    /// The expanded parity-check matrix.
    pub fn parity_matrix(&self) -> &SparseBinaryMatrix {
        &self.h
    }

    /// Serialize H in canonical alist text.
    pub fn to_alist(&self) -> String {
        self.h.to_alist()
    }

    /// Systematic encode: `info` (k bits) → codeword (n bits), info first.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k {
            return Err(Error::SizeMismatch {
                context: "LDPC encode input",
                expected: self.k,
                actual: info.len(),
            });
        }
        let z = self.z;
        // Row accumulators t_r = Σ_j P(s_{r,j})·info_j over info columns.
        let mut t = vec![vec![0u8; z]; BASE_ROWS];
        for (r, row) in self.base.iter().enumerate() {
            for (c, &shift) in row.iter().take(INFO_COLS).enumerate() {
                if let Some(s) = shift {
                    let block = &info[c * z..(c + 1) * z];
                    for i in 0..z {
                        t[r][i] ^= block[(i + s) % z];
                    }
                }
            }
        }
        // Dual-diagonal back-substitution. The parity tail is
        //   col 20: rows {0: P(1), 1: P(0), 3: P(1)}
        //   col 21: rows {0, 1} identity     col 22: rows {1, 2} identity
        //   col 23: rows {2, 3} identity
        // Summing all four block-rows cancels everything except P(0)p0,
        // giving p0 directly; the rest back-substitutes row by row.
        let mut p0 = vec![0u8; z];
        for i in 0..z {
            p0[i] = t[0][i] ^ t[1][i] ^ t[2][i] ^ t[3][i];
        }
        let mut p1 = vec![0u8; z];
        for i in 0..z {
            p1[i] = t[0][i] ^ p0[(i + 1) % z];
        }
        let mut p2 = vec![0u8; z];
        for i in 0..z {
            p2[i] = t[1][i] ^ p0[i] ^ p1[i];
        }
        let mut p3 = vec![0u8; z];
        for i in 0..z {
            p3[i] = t[2][i] ^ p2[i];
        }
        let mut cw = Vec::with_capacity(self.n);
        cw.extend_from_slice(info);
        cw.extend_from_slice(&p0);
        cw.extend_from_slice(&p1);
        cw.extend_from_slice(&p2);
        cw.extend_from_slice(&p3);
        debug_assert!(self.h.syndrome_ok(&cw).unwrap_or(false));
        Ok(cw)
    }

    /// Does `bits` satisfy every parity check?
    pub fn syndrome_ok(&self, bits: &[u8]) -> Result<bool> {
        self.h.syndrome_ok(bits)
    }

    /// Full sum-product decode with up to `max_iters` iterations
    /// (early exit on clean parity). `max_iters` must be ≥ 1.
    pub fn decode(&self, llr: &[f64], max_iters: usize) -> Result<DecodeResult> {
        if max_iters == 0 {
            return Err(Error::InvalidConfig(
                "LDPC decode needs at least one iteration".into(),
            ));
        }
        self.decoder.decode(llr, max_iters)
    }

    /// Partial decode used by FEC-assisted interference cancellation: runs
    /// exactly the inner share of the iteration budget and returns posterior
    /// soft values (and their hard decisions) for re-mapping. Decoder state
    /// is not retained — the final decode after cancellation restarts on the
    /// improved LLRs with the remaining budget.
    pub fn segment_decode(
        &self,
        llr: &[f64],
        inner_iters: usize,
        total_budget: usize,
    ) -> Result<DecodeResult> {
        if inner_iters >= total_budget {
            return Err(Error::InvalidConfig(format!(
                "segment decode inner share ({inner_iters}) must be below the total budget ({total_budget})"
            )));
        }
        self.decoder.decode(llr, inner_iters)
    }

    /// The information bits of a systematic codeword.
    pub fn info_bits<'a>(&self, codeword: &'a [u8]) -> &'a [u8] {
        &codeword[..self.k]
    }
}

/// Deterministic base-matrix construction for circulant size `z`.
fn build_base(z: usize) -> [[Option<usize>; BASE_COLS]; BASE_ROWS] {
    let mut base = [[None; BASE_COLS]; BASE_ROWS];

    // Parity tail (fixed).
    base[0][20] = Some(1);
    base[1][20] = Some(0);
    base[3][20] = Some(1);
    base[0][21] = Some(0);
    base[1][21] = Some(0);
    base[1][22] = Some(0);
    base[2][22] = Some(0);
    base[2][23] = Some(0);
    base[3][23] = Some(0);

    // Track circulant-shift differences per row pair; two columns sharing a
    // row pair with equal differences would close a 4-cycle in the expanded
    // graph.
    let mut used: std::collections::HashSet<(usize, usize, usize)> = std::collections::HashSet::new();
    let record = |used: &mut std::collections::HashSet<(usize, usize, usize)>,
                      rows: &[usize],
                      shifts: &[usize]| {
        for a in 0..rows.len() {
            for b in a + 1..rows.len() {
                let d = (shifts[a] + z - shifts[b]) % z;
                used.insert((rows[a], rows[b], d));
            }
        }
    };
    record(&mut used, &[0, 1, 3], &[1, 0, 1]); // col 20
    record(&mut used, &[0, 1], &[0, 0]); // col 21
    record(&mut used, &[1, 2], &[0, 0]); // col 22
    record(&mut used, &[2, 3], &[0, 0]); // col 23

    for col in 0..INFO_COLS {
        // Weight-3 column: skip one row so row degrees stay balanced.
        let skip = col % BASE_ROWS;
        let rows: Vec<usize> = (0..BASE_ROWS).filter(|&r| r != skip).collect();
        let cand: Vec<usize> = rows
            .iter()
            .map(|&r| {
                ((col as u64 + 1)
                    .wrapping_mul(2 * r as u64 + 3)
                    .wrapping_mul(2654435761)
                    % z as u64) as usize
            })
            .collect();
        // Drift the second and third shifts until all three pairwise
        // differences are fresh.
        let mut placed = false;
        for t in 0..z {
            let shifts: Vec<usize> = cand
                .iter()
                .enumerate()
                .map(|(i, &s)| (s + i * t) % z)
                .collect();
            let mut fresh = true;
            'pairs: for a in 0..rows.len() {
                for b in a + 1..rows.len() {
                    let d = (shifts[a] + z - shifts[b]) % z;
                    if used.contains(&(rows[a], rows[b], d)) {
                        fresh = false;
                        break 'pairs;
                    }
                }
            }
            if fresh {
                record(&mut used, &rows, &shifts);
                for (i, &r) in rows.iter().enumerate() {
                    base[r][col] = Some(shifts[i]);
                }
                placed = true;
                break;
            }
        }
        // With z ≥ 8 the difference space is far larger than the number of
        // recorded pairs, so placement always succeeds; fall back to the raw
        // candidates if it somehow did not.
        if !placed {
            for (i, &r) in rows.iter().enumerate() {
                base[r][col] = Some(cand[i]);
            }
        }
    }
    base
}

/// Expand the base matrix into the sparse binary H.
fn expand_base(
    base: &[[Option<usize>; BASE_COLS]; BASE_ROWS],
    z: usize,
) -> Result<SparseBinaryMatrix> {
    let n = BASE_COLS * z;
    let mut rows = Vec::with_capacity(BASE_ROWS * z);
    for brow in base.iter() {
        for i in 0..z {
            let mut cols: Vec<u32> = brow
                .iter()
                .enumerate()
                .filter_map(|(c, &s)| s.map(|s| (c * z + (i + s) % z) as u32))
                .collect();
            cols.sort_unstable();
            rows.push(cols);
        }
    }
    SparseBinaryMatrix::new(n, rows)
}

/// Gray-mapped QPSK log-likelihood ratios at unit symbol energy: per symbol,
/// LLR(first bit) = 2√2·Re/σ² and LLR(second bit) = 2√2·Im/σ², positive
/// meaning bit 0. `noise_variance` is the total complex noise power σ².
pub fn llr_qpsk(symbols: &[Complex64], noise_variance: f64) -> Result<Vec<f64>> {
    if !(noise_variance > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "noise variance must be positive, got {noise_variance}"
        )));
    }
    let g = 2.0 * 2f64.sqrt() / noise_variance;
    let mut out = Vec::with_capacity(symbols.len() * 2);
    for s in symbols {
        out.push(g * s.re);
        out.push(g * s.im);
    }
    Ok(out)
}
