//! Behavioral Monte Carlo model of threshold-biased SRAM cells.
//!
//! A manufactured cell reduces to one latent mismatch voltage: the
//! difference between its two PMOS thresholds, one of which carries the
//! designed offset. Each power-up compares mismatch plus fresh transient
//! noise against zero, so a cell's long-run error rate is
//! Φ(−mismatch / σ_noise). Populations of such cells stand in for circuit
//! simulation when fitting the heterogeneous error-rate model.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::normal::phi;
use crate::rng::StreamKey;
use crate::{Error, Result};

/// Nominal PMOS threshold magnitude, mV. Only threshold *differences* enter
/// the model; the nominal values are carried for the attack simulation and
/// documentation.
pub const PMOS_NOMINAL_VT_MV: f64 = 418.0;
/// Nominal NMOS threshold, mV.
pub const NMOS_NOMINAL_VT_MV: f64 = 469.0;
/// Default transient-noise standard deviation, mV. The flow normally
/// replaces this with a calibrated value (see `explorer::calibrate`).
pub const DEFAULT_SIGMA_NOISE_MV: f64 = 40.0;
/// Default relative influence of an NMOS-side offset (one-probability
/// comparison only).
pub const DEFAULT_NMOS_SENSITIVITY: f64 = 0.6;

/// Physical parameters of a biased cell population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellPhysicalParams {
    /// Intended threshold offset Δ_vt applied to one PMOS device, mV.
    pub delta_vt: f64,
    /// Per-transistor process-variation standard deviation σ_var, mV.
    pub sigma_var: f64,
    /// Equivalent transient-noise standard deviation per evaluation σ_n, mV.
    pub sigma_noise: f64,
    /// Relative influence κ of an NMOS-side offset.
    pub nmos_sensitivity: f64,
}

impl CellPhysicalParams {
    pub fn new(delta_vt: f64, sigma_var: f64, sigma_noise: f64) -> Result<Self> {
        if !delta_vt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "delta_vt must be finite, got {delta_vt}"
            )));
        }
        if !(sigma_var >= 0.0) || !sigma_var.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma_var must be >= 0, got {sigma_var}"
            )));
        }
        if !(sigma_noise >= 0.0) || !sigma_noise.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma_noise must be >= 0, got {sigma_noise}"
            )));
        }
        Ok(CellPhysicalParams {
            delta_vt,
            sigma_var,
            sigma_noise,
            nmos_sensitivity: DEFAULT_NMOS_SENSITIVITY,
        })
    }

    pub fn with_nmos_sensitivity(mut self, kappa: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&kappa) {
            return Err(Error::InvalidParameter(format!(
                "nmos_sensitivity must be in [0,1], got {kappa}"
            )));
        }
        self.nmos_sensitivity = kappa;
        Ok(self)
    }

    /// Standard deviation of the latent mismatch: two independently varying
    /// PMOS thresholds contribute √2·σ_var.
    pub fn mismatch_sigma(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.sigma_var
    }
}

/// One manufactured cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellInstance {
    /// Realized latent mismatch, mV. Positive values favor the intended bit.
    pub process_value: f64,
    /// Bit the designer encoded.
    pub intended_bit: u8,
}

/// Per-cell empirical error probabilities from a simulated population.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalErrorData {
    /// One entry per cell, each an integer multiple of 1/trials_per_cell.
    pub error_probs: Vec<f64>,
    pub cells: usize,
    pub trials_per_cell: u32,
}

impl EmpiricalErrorData {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cell_index,error_prob\n");
        for (i, p) in self.error_probs.iter().enumerate() {
            out.push_str(&format!("{i},{p:.9}\n"));
        }
        out
    }
}

/// Which transistor carries the designed offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiasedDevice {
    Pmos,
    Nmos,
}

/// Draw one manufactured cell: mismatch ~ Normal(Δ_vt, 2σ_var²).
pub fn sample_cell<R: Rng + ?Sized>(params: &CellPhysicalParams, rng: &mut R) -> CellInstance {
    let dist = Normal::new(params.delta_vt, params.mismatch_sigma()).expect("validated params");
    CellInstance {
        process_value: dist.sample(rng),
        intended_bit: 1,
    }
}

/// One power-up evaluation: 1 iff mismatch plus transient noise is
/// nonnegative (exact ties resolve to 1).
pub fn evaluate_cell<R: Rng + ?Sized>(
    cell: &CellInstance,
    params: &CellPhysicalParams,
    rng: &mut R,
) -> u8 {
    let noise = Normal::new(0.0, params.sigma_noise).expect("validated params");
    u8::from(cell.process_value + noise.sample(rng) >= 0.0)
}

/// Long-run probability that the cell produces the non-intended bit.
pub fn error_probability(cell: &CellInstance, params: &CellPhysicalParams) -> f64 {
    if params.sigma_noise > 0.0 {
        phi(-cell.process_value / params.sigma_noise)
    } else if cell.process_value >= 0.0 {
        0.0
    } else {
        1.0
    }
}

/// Simulate a population of cells, each evaluated `trials` times, and record
/// per-cell empirical error probabilities. Intended bit is fixed to 1
/// without loss of generality (the cell is symmetric). Cells run on
/// independent substreams keyed by cell index.
pub fn simulate_population(
    params: &CellPhysicalParams,
    cells: usize,
    trials: u32,
    key: StreamKey,
) -> EmpiricalErrorData {
    assert!(cells >= 1 && trials >= 1);
    let error_probs: Vec<f64> = (0..cells)
        .into_par_iter()
        .map(|i| {
            let mut rng = key.rng(i as u64);
            let cell = sample_cell(params, &mut rng);
            let mut errors = 0u32;
            for _ in 0..trials {
                if evaluate_cell(&cell, params, &mut rng) != cell.intended_bit {
                    errors += 1;
                }
            }
            f64::from(errors) / f64::from(trials)
        })
        .collect();
    EmpiricalErrorData {
        error_probs,
        cells,
        trials_per_cell: trials,
    }
}

/// Fraction of cells biased toward 1 (long-run 1-rate above one half) for
/// each offset. An NMOS-side offset acts through the sensitivity factor κ.
pub fn one_probability_curve(
    params: &CellPhysicalParams,
    offsets: &[f64],
    device: BiasedDevice,
    cells: usize,
    key: StreamKey,
) -> Vec<(f64, f64)> {
    assert!(offsets.iter().all(|o| o.is_finite()));
    offsets
        .iter()
        .enumerate()
        .map(|(oi, &offset)| {
            let effective = match device {
                BiasedDevice::Pmos => offset,
                BiasedDevice::Nmos => params.nmos_sensitivity * offset,
            };
            let p = CellPhysicalParams {
                delta_vt: effective,
                ..*params
            };
            let okey = key.child(oi as u64);
            let biased: usize = (0..cells)
                .into_par_iter()
                .filter(|&i| {
                    let mut rng = okey.rng(i as u64);
                    let cell = sample_cell(&p, &mut rng);
                    let one_rate = 1.0 - error_probability(&cell, &p);
                    one_rate > 0.5
                })
                .count();
            (offset, biased as f64 / cells as f64)
        })
        .collect()
}
