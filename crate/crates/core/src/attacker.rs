//! Closed-form analysis of invasive key readout.
//!
//! The attacker measures both PMOS thresholds of every cell on unpowered
//! chips. Process variation and measurement error blur the designed offset;
//! measuring C chips and averaging shrinks both. Binomial tails over a
//! block, raised to the block count, give the key readout success rate.
//! Tail terms are accumulated in the log domain (log-gamma binomial
//! coefficients) so that probabilities at the 1e-40 scale keep full
//! relative precision.

use crate::bch::BchCodeSpec;
use crate::normal::phi;
use crate::{Error, Result};

/// Attacker capability: per-measurement error and chips measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackerParams {
    /// Threshold-measurement error standard deviation σ_err, mV.
    pub sigma_err: f64,
    /// Number of chip instances measured and averaged.
    pub chips: u32,
}

impl AttackerParams {
    pub fn new(sigma_err: f64, chips: u32) -> Result<Self> {
        if !(sigma_err >= 0.0) || !sigma_err.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma_err must be >= 0, got {sigma_err}"
            )));
        }
        if chips < 1 {
            return Err(Error::InvalidParameter("chips must be >= 1".into()));
        }
        Ok(AttackerParams { sigma_err, chips })
    }
}

/// One point in the design space: offset, code, and key size.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignPoint {
    pub delta_vt: f64,
    pub code: BchCodeSpec,
    pub key_bits: usize,
    pub sigma_var: f64,
}

impl DesignPoint {
    pub fn new(delta_vt: f64, code: BchCodeSpec, key_bits: usize, sigma_var: f64) -> Result<Self> {
        if !(delta_vt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta_vt must be positive, got {delta_vt}"
            )));
        }
        if key_bits < 1 {
            return Err(Error::InvalidParameter("key_bits must be >= 1".into()));
        }
        Ok(DesignPoint {
            delta_vt,
            code,
            key_bits,
            sigma_var,
        })
    }
}

/// Probability that the attacker infers the wrong bit for one cell.
///
/// The measured threshold difference is Normal(Δ_vt, (2σ_var² + 2σ_err²)/C);
/// a misread is that difference falling below zero. A zero-variance setup
/// degenerates to a step function (logged as a warning).
pub fn misread_probability(delta_vt: f64, sigma_var: f64, attacker: &AttackerParams) -> f64 {
    let variance =
        (2.0 * sigma_var * sigma_var + 2.0 * attacker.sigma_err * attacker.sigma_err)
            / f64::from(attacker.chips);
    if variance == 0.0 {
        log::warn!(
            "misread_probability: zero variance at delta_vt = {delta_vt}; returning step convention"
        );
        return if delta_vt > 0.0 { 0.0 } else { 0.5 };
    }
    phi(-delta_vt / variance.sqrt())
}

/// Misread probability when the attacker re-measures a single chip R times
/// instead of averaging across chips: only measurement noise shrinks,
/// process variation does not. This is an extension mode, not part of the
/// standard analysis; the multi-chip model above is the default.
pub fn misread_probability_single_chip_repeated(
    delta_vt: f64,
    sigma_var: f64,
    sigma_err: f64,
    repeats: u32,
) -> f64 {
    assert!(repeats >= 1);
    let variance = 2.0 * sigma_var * sigma_var + 2.0 * sigma_err * sigma_err / f64::from(repeats);
    if variance == 0.0 {
        return if delta_vt > 0.0 { 0.0 } else { 0.5 };
    }
    phi(-delta_vt / variance.sqrt())
}

/// ln C(n, k) via log-gamma.
fn ln_choose(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    libm::lgamma((n + 1) as f64) - libm::lgamma((k + 1) as f64) - libm::lgamma((n - k + 1) as f64)
}

/// ln P(X ≤ t) for X ~ Binomial(n, p), via log-domain term summation
/// anchored at the largest term.
fn ln_binomial_cdf(n: usize, t: usize, p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    if t >= n || p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return f64::NEG_INFINITY;
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let terms: Vec<f64> = (0..=t)
        .map(|i| ln_choose(n, i) + i as f64 * ln_p + (n - i) as f64 * ln_q)
        .collect();
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|&l| (l - max).exp()).sum();
    (max + sum.ln()).min(0.0)
}

/// Probability of reading a whole block within the code's correction
/// radius: Σ_{i=0}^{t} C(n,i) p^i (1−p)^{n−i}.
pub fn block_read_success(code: &BchCodeSpec, p_re: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p_re), "p_re must be in [0,1]");
    ln_binomial_cdf(code.n(), code.t(), p_re).exp()
}

/// Probability of reading the whole key: block success raised to the number
/// of blocks (independent, identically distributed misreads).
pub fn key_read_success(design: &DesignPoint, attacker: &AttackerParams) -> f64 {
    let p_re = misread_probability(design.delta_vt, design.sigma_var, attacker);
    let blocks = design.code.blocks_for_key(design.key_bits) as f64;
    (blocks * ln_binomial_cdf(design.code.n(), design.code.t(), p_re)).exp()
}

/// Key readout success as a function of the number of chips measured.
pub fn success_vs_chips(design: &DesignPoint, sigma_err: f64, c_max: u32) -> Vec<(u32, f64)> {
    assert!(c_max >= 1);
    (1..=c_max)
        .map(|c| {
            let attacker = AttackerParams {
                sigma_err,
                chips: c,
            };
            (c, key_read_success(design, &attacker))
        })
        .collect()
}

/// Total transistor threshold measurements: two PMOS devices per cell, n
/// cells per block, ⌈k/m⌉ blocks, C chips.
pub fn measurement_cost(design: &DesignPoint, attacker: &AttackerParams) -> u64 {
    u64::from(attacker.chips)
        * 2
        * design.code.n() as u64
        * design.code.blocks_for_key(design.key_bits) as u64
}

/// CSV row `delta_vt,n,m,t,cells,p_rskey` for reproducing the reference
/// design table.
pub fn reproduction_row(design: &DesignPoint, attacker: &AttackerParams) -> String {
    format!(
        "{},{},{},{},{},{:.6e}",
        design.delta_vt,
        design.code.n(),
        design.code.m(),
        design.code.t(),
        design.code.cells_for_key(design.key_bits),
        key_read_success(design, attacker)
    )
}
