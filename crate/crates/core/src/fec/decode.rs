//! Flooding-schedule sum-product decoding.
//!
//! The decoder is built once per parity-check matrix (edge adjacency in CSR
//! form) and is then immutable: every `decode` call uses local message
//! buffers, so distinct blocks decode concurrently on the same decoder.

use crate::error::{Error, Result};
use crate::fec::alist::SparseBinaryMatrix;

/// Outcome of a (possibly partial) decode.
#[derive(Debug, Clone)]
pub struct DecodeResult {
    /// Hard decisions for all n code bits (1 = bit one).
    pub bits: Vec<u8>,
    /// Sum-product iterations actually run (early exit on clean parity).
    pub iterations: usize,
    /// True when the returned bits satisfy every parity check.
    pub parity_ok: bool,
    /// Posterior LLRs (channel plus accumulated check messages).
    pub posterior: Vec<f64>,
}

/// Message magnitudes are clamped here to keep tanh products away from ±1.
const LLR_CLAMP: f64 = 30.0;

/// Sum-product decoder over a fixed parity-check matrix.
#[derive(Debug, Clone)]
pub struct SumProductDecoder {
    n: usize,
    /// Edge target variable, grouped by check (CSR over checks).
    edge_var: Vec<u32>,
    check_ptr: Vec<u32>,
    /// Edge indices grouped by variable (CSR over variables).
    var_edge: Vec<u32>,
    var_ptr: Vec<u32>,
}

impl SumProductDecoder {
    /// Build the edge structure for `h`.
    pub fn new(h: &SparseBinaryMatrix) -> Self {
        let n = h.n_cols();
        let mut edge_var = Vec::with_capacity(h.nnz());
        let mut check_ptr = Vec::with_capacity(h.n_rows() + 1);
        check_ptr.push(0u32);
        for row in h.rows() {
            edge_var.extend_from_slice(row);
            check_ptr.push(edge_var.len() as u32);
        }
        // Transpose: per-variable edge lists.
        let mut var_deg = vec![0u32; n];
        for &v in &edge_var {
            var_deg[v as usize] += 1;
        }
        let mut var_ptr = vec![0u32; n + 1];
        for i in 0..n {
            var_ptr[i + 1] = var_ptr[i] + var_deg[i];
        }
        let mut fill = var_ptr.clone();
        let mut var_edge = vec![0u32; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edge[fill[v as usize] as usize] = e as u32;
            fill[v as usize] += 1;
        }
        Self {
            n,
            edge_var,
            check_ptr,
            var_edge,
            var_ptr,
        }
    }

    /// Number of code bits.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Run up to `max_iters` flooding iterations, stopping early as soon as
    /// the running hard decision satisfies all checks. `max_iters = 0` is a
    /// pass-through: posterior = channel LLRs.
    pub fn decode(&self, llr: &[f64], max_iters: usize) -> Result<DecodeResult> {
        if llr.len() != self.n {
            return Err(Error::SizeMismatch {
                context: "decoder LLR block",
                expected: self.n,
                actual: llr.len(),
            });
        }
        let n_edges = self.edge_var.len();
        let n_checks = self.check_ptr.len() - 1;
        let mut chk_to_var = vec![0.0f64; n_edges];
        let mut var_to_chk = vec![0.0f64; n_edges];
        let mut posterior: Vec<f64> = llr.to_vec();
        let mut bits = hard_decide(&posterior);
        let mut iterations = 0usize;
        let mut parity_ok = self.syndrome_ok(&bits);

        let max_deg = (0..n_checks)
            .map(|c| (self.check_ptr[c + 1] - self.check_ptr[c]) as usize)
            .max()
            .unwrap_or(0);
        let mut tanh_buf = vec![0.0f64; max_deg];
        let mut suffix = vec![0.0f64; max_deg];
        for _ in 0..max_iters {
            iterations += 1;

            // Variable-to-check: posterior minus the incoming message on the
            // same edge (extrinsic), clamped.
            for v in 0..self.n {
                let total = posterior[v];
                for &e in &self.var_edge[self.var_ptr[v] as usize..self.var_ptr[v + 1] as usize] {
                    let m = total - chk_to_var[e as usize];
                    var_to_chk[e as usize] = m.clamp(-LLR_CLAMP, LLR_CLAMP);
                }
            }

            // Check-to-variable: tanh-product rule with prefix/suffix
            // products so each exclusion is O(1).
            for c in 0..n_checks {
                let lo = self.check_ptr[c] as usize;
                let hi = self.check_ptr[c + 1] as usize;
                let deg = hi - lo;
                for (t, e) in tanh_buf.iter_mut().zip(lo..hi) {
                    *t = (var_to_chk[e] / 2.0).tanh();
                }
                // suffix[i] = product of tanh over edges after i; prefix runs
                // forward so each exclusion product is O(1).
                if deg > 0 {
                    suffix[deg - 1] = 1.0;
                    for i in (0..deg - 1).rev() {
                        suffix[i] = suffix[i + 1] * tanh_buf[i + 1];
                    }
                }
                let mut prefix = 1.0f64;
                for i in 0..deg {
                    let excl = (prefix * suffix[i]).clamp(-0.999_999_999_999_999, 0.999_999_999_999_999);
                    chk_to_var[lo + i] = (2.0 * excl.atanh()).clamp(-LLR_CLAMP, LLR_CLAMP);
                    prefix *= tanh_buf[i];
                }
            }

            // Posterior and tentative hard decision.
            for v in 0..self.n {
                let mut total = llr[v];
                for &e in &self.var_edge[self.var_ptr[v] as usize..self.var_ptr[v + 1] as usize] {
                    total += chk_to_var[e as usize];
                }
                posterior[v] = total;
            }
            bits = hard_decide(&posterior);
            parity_ok = self.syndrome_ok(&bits);
            if parity_ok {
                break;
            }
        }

        Ok(DecodeResult {
            bits,
            iterations,
            parity_ok,
            posterior,
        })
    }

    fn syndrome_ok(&self, bits: &[u8]) -> bool {
        let n_checks = self.check_ptr.len() - 1;
        (0..n_checks).all(|c| {
            let lo = self.check_ptr[c] as usize;
            let hi = self.check_ptr[c + 1] as usize;
            self.edge_var[lo..hi]
                .iter()
                .fold(0u8, |acc, &v| acc ^ bits[v as usize])
                == 0
        })
    }
}

/// Positive LLR means bit 0; nonpositive decides 1.
fn hard_decide(llr: &[f64]) -> Vec<u8> {
    llr.iter().map(|&l| if l > 0.0 { 0 } else { 1 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// (7,4) Hamming code parity-check matrix; small enough to reason about
    /// by hand and a real code, so the decoder exercises actual corrections.
    fn hamming() -> SparseBinaryMatrix {
        SparseBinaryMatrix::new(
            7,
            vec![vec![0, 1, 2, 4], vec![0, 1, 3, 5], vec![0, 2, 3, 6]],
        )
        .unwrap()
    }

    fn to_llr(bits: &[u8]) -> Vec<f64> {
        bits.iter().map(|&b| if b == 0 { 20.0 } else { -20.0 }).collect()
    }

    #[test]
    fn test_clean_codeword_one_iteration() {
        let h = hamming();
        let dec = SumProductDecoder::new(&h);
        // All-zero word is always a codeword.
        let r = dec.decode(&to_llr(&[0; 7]), 10).unwrap();
        assert!(r.parity_ok);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.bits, vec![0; 7]);
    }

    #[test]
    fn test_single_flip_corrected() {
        let h = hamming();
        let dec = SumProductDecoder::new(&h);
        let mut llr = to_llr(&[0; 7]);
        llr[3] = -20.0; // flip bit 3 confidently
        let r = dec.decode(&llr, 10).unwrap();
        assert!(r.parity_ok);
        assert_eq!(r.bits, vec![0; 7], "single error must be corrected");
    }

    #[test]
    fn test_zero_iterations_pass_through() {
        let h = hamming();
        let dec = SumProductDecoder::new(&h);
        let llr = vec![1.5, -0.5, 2.0, -3.0, 0.25, 1.0, -1.0];
        let r = dec.decode(&llr, 0).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.posterior, llr);
        assert_eq!(r.bits, vec![0, 1, 0, 1, 0, 0, 1]);
    }

    #[test]
    fn test_length_mismatch() {
        let dec = SumProductDecoder::new(&hamming());
        assert!(dec.decode(&[0.0; 6], 5).is_err());
    }
}
