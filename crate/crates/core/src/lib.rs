//! End-to-end simulation library for non-orthogonal FDM (NOFDM) coherent
//! optical links.
//!
//! The crate models a dual-polarization fiber link whose subcarriers are
//! deliberately packed closer than the orthogonal spacing (α = b/c < 1),
//! trading controlled inter-carrier interference for spectral efficiency,
//! plus the orthogonal (α = 1) QPSK and probabilistically shaped 16-QAM
//! baselines it is compared against:
//!
//! * [`transforms`] — compressed-spacing modulation/demodulation, the pruned
//!   radix-2 fast path and its operation counts, and the inter-carrier
//!   interference matrix.
//! * [`fec`] — quasi-cyclic rate-5/6 LDPC code: encoder, sum-product
//!   decoder, segmented decoding budgets, alist import/export.
//! * [`tx`] — bits→waveform: FEC, QPSK / shaped 16-QAM mapping, framing
//!   (training sequence + pilots), pulse shaping, timing-tone insertion.
//! * [`channel`] — linear impairments: chromatic dispersion, cascaded
//!   optical filtering, ASE noise by OSNR, carrier frequency offset, laser
//!   phase noise, sampling-clock offset.
//! * [`rx`] — receiver DSP: dispersion compensation, matched filtering,
//!   tone-based timing recovery, frame sync/frequency-offset estimation,
//!   2×2 time-domain MIMO equalization, pilot carrier-phase recovery, and
//!   conventional plus FEC-assisted iterative interference cancellation.
//! * [`scenario`] — configuration, deterministic seeding, the end-to-end
//!   runner, parameter sweeps, filter calibration and report/dump I/O.
//!
//! Everything is deterministic given a scenario seed: identical
//! configuration and seed produce byte-identical reports.

pub mod channel;
pub mod dsp;
pub mod error;
pub mod fec;
pub mod rx;
pub mod scenario;
pub mod transforms;
pub mod tx;
pub mod waveform;

pub use error::{Error, Result};
