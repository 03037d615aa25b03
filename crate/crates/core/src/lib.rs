//! Analysis toolkit for keys stored in threshold-voltage-biased memory cells.
//!
//! A designer hides a master key by skewing the threshold voltage of one
//! PMOS device per SRAM cell so that the cell powers up to a chosen bit.
//! Cells misbehave under process variation and noise, so the encoded key is
//! protected by a binary BCH code. An invasive attacker measures transistor
//! thresholds directly (with error) and runs the same decoder.
//!
//! This crate models both sides of that arms race:
//!
//! * [`cell_sim`] — Monte Carlo model of biased cells and their empirical
//!   error probabilities.
//! * [`error_model`] — the two-parameter heterogeneous error-rate
//!   distribution fitted to simulated populations.
//! * [`bch`] — a BCH codec over GF(2^8) for length-255 codes.
//! * [`reliability`] — Poisson-binomial block/key failure math and
//!   minimal-code selection against a reliability criterion.
//! * [`attacker`] — closed-form key-readout success under imperfect
//!   threshold measurement, including multi-chip averaging.
//! * [`explorer`] — the end-to-end design flow, noise calibration,
//!   empirical attack simulation, and CSV report emission.
//!
//! All randomness flows through explicit seeded streams ([`rng::StreamKey`]),
//! so every pipeline output is reproducible bit-for-bit regardless of thread
//! count.

pub mod attacker;
pub mod bch;
pub mod cell_sim;
pub mod error_model;
pub mod explorer;
pub mod normal;
pub mod reliability;
pub mod rng;

use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("no BCH code of length 255 for t = {0}")]
    UnsupportedT(usize),
    #[error("length mismatch: expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("uncorrectable error pattern detected")]
    DecodeFailure,
    #[error("insufficient samples: need at least {needed} chips, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("no candidate code satisfies the reliability criterion")]
    NoFeasibleCode,
    #[error("calibration failed: best match {best_matches}/5 at sigma_noise = {best_sigma_noise} mV")]
    CalibrationFailed {
        best_sigma_noise: f64,
        best_matches: usize,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
