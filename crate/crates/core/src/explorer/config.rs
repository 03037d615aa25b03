//! Flow configuration: defaults, `key = value` file parsing, validation.

use std::collections::BTreeMap;
use std::path::Path;

use crate::bch::CANONICAL_CODES;
use crate::reliability::ReliabilityCriterion;
use crate::{Error, Result};

/// Noise level fed to the cell model, per offset.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSpec {
    /// Use the calibrated per-offset table (interpolated between entries).
    Calibrated,
    /// One value for every offset.
    Fixed(f64),
    /// One value per configured offset, in order.
    PerOffset(Vec<f64>),
}

/// Per-offset transient-noise values reproducing the reference pairings.
///
/// Found by `explorer::calibrate_noise_per_offset` with the default
/// configuration (seed 42), then centered inside each matching window so
/// the default flow reproduces all five pairings; the windows at 150 and
/// 250 mV are only 1–2 mV wide, so selections there sit within Monte Carlo
/// uncertainty of a boundary. A single global value cannot reproduce the
/// pairings at all; see the calibration module.
pub const CALIBRATED_SIGMA_NOISE_MV: [(f64, f64); 5] = [
    (100.0, 47.0),
    (150.0, 66.0),
    (200.0, 81.0),
    (250.0, 95.0),
    (300.0, 111.0),
];

impl NoiseSpec {
    /// Resolve to one σ_n per offset.
    pub fn resolve(&self, offsets: &[f64]) -> Result<Vec<f64>> {
        match self {
            NoiseSpec::Fixed(v) => Ok(vec![*v; offsets.len()]),
            NoiseSpec::PerOffset(vals) => {
                if vals.len() != offsets.len() {
                    return Err(Error::InvalidParameter(format!(
                        "sigma_noise list has {} entries for {} offsets",
                        vals.len(),
                        offsets.len()
                    )));
                }
                Ok(vals.clone())
            }
            NoiseSpec::Calibrated => Ok(offsets
                .iter()
                .map(|&dvt| interpolate_calibrated(dvt))
                .collect()),
        }
    }
}

fn interpolate_calibrated(delta_vt: f64) -> f64 {
    let table = &CALIBRATED_SIGMA_NOISE_MV;
    if delta_vt <= table[0].0 {
        return table[0].1;
    }
    for w in table.windows(2) {
        let (d0, s0) = w[0];
        let (d1, s1) = w[1];
        if delta_vt <= d1 {
            return s0 + (s1 - s0) * (delta_vt - d0) / (d1 - d0);
        }
    }
    table[table.len() - 1].1
}

/// Full configuration of the design-exploration flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    /// Threshold offsets to explore, mV.
    pub offsets: Vec<f64>,
    /// Process-variation standard deviation, mV.
    pub sigma_var: f64,
    /// Transient-noise specification.
    pub noise: NoiseSpec,
    /// Key size in bits.
    pub key_bits: usize,
    pub criterion: ReliabilityCriterion,
    /// Attacker measurement-error values to evaluate, mV.
    pub sigma_errs: Vec<f64>,
    /// Attacker chip counts to evaluate.
    pub attack_chips: Vec<u32>,
    /// Candidate error-correction strengths, ascending.
    pub candidate_ts: Vec<usize>,
    pub seed: u64,
    /// Cells per simulated population.
    pub cells: usize,
    /// Power-up trials per cell.
    pub trials: u32,
    /// Simulated chips per key-failure distribution.
    pub chips: usize,
    /// SRAM cell area, µm².
    pub cell_area_um2: f64,
    /// Decoder area per error-correction strength, µm² (provided constants).
    pub decoder_areas: BTreeMap<usize, f64>,
    /// Chip counts for the success-vs-chips curve.
    pub curve_c_max: u32,
    /// Noise-calibration search range, mV.
    pub calibration_range: (f64, f64),
    /// Grid step of the exhaustive calibration search, mV.
    pub calibration_step: f64,
    /// Offset used for the reliability/security tradeoff curve, mV.
    pub tradeoff_delta_vt: f64,
    /// Measurement error used for the tradeoff curve, mV.
    pub tradeoff_sigma_err: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            offsets: vec![100.0, 150.0, 200.0, 250.0, 300.0],
            sigma_var: 30.0,
            noise: NoiseSpec::Calibrated,
            key_bits: 128,
            criterion: ReliabilityCriterion::default(),
            sigma_errs: vec![200.0],
            attack_chips: vec![1],
            candidate_ts: CANONICAL_CODES.iter().map(|&(_, t)| t).collect(),
            seed: 42,
            cells: 512,
            trials: 300,
            chips: 1000,
            cell_area_um2: 0.345,
            decoder_areas: [
                (11, 21602.0),
                (13, 24835.0),
                (18, 31428.0),
                (25, 40723.0),
                (42, 61403.0),
            ]
            .into_iter()
            .collect(),
            curve_c_max: 15,
            calibration_range: (5.0, 120.0),
            calibration_step: 1.0,
            tradeoff_delta_vt: 200.0,
            tradeoff_sigma_err: 100.0,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.offsets.is_empty() {
            return Err(Error::InvalidParameter("offsets list is empty".into()));
        }
        if self.offsets.iter().any(|&o| !(o > 0.0) || !o.is_finite()) {
            return Err(Error::InvalidParameter(
                "offsets must be positive and finite".into(),
            ));
        }
        if !(self.sigma_var >= 0.0) {
            return Err(Error::InvalidParameter("sigma_var must be >= 0".into()));
        }
        if self.key_bits < 1 {
            return Err(Error::InvalidParameter("key_bits must be >= 1".into()));
        }
        if self.cells < 2 || self.trials < 1 || self.chips < 1 {
            return Err(Error::InvalidParameter(
                "cells, trials and chips must be positive".into(),
            ));
        }
        if self.sigma_errs.is_empty() || self.attack_chips.is_empty() {
            return Err(Error::InvalidParameter(
                "sigma_err and attack_chips lists must be nonempty".into(),
            ));
        }
        if self.candidate_ts.is_empty() {
            return Err(Error::InvalidParameter("no candidate codes".into()));
        }
        if !(self.cell_area_um2 > 0.0) {
            return Err(Error::InvalidParameter("cell_area_um2 must be positive".into()));
        }
        let (lo, hi) = self.calibration_range;
        if !(lo > 0.0 && hi > lo && self.calibration_step > 0.0) {
            return Err(Error::InvalidParameter(
                "calibration range/step must be positive with hi > lo".into(),
            ));
        }
        self.noise.resolve(&self.offsets)?;
        Ok(())
    }

    /// Parse a plain-text config: one `key = value` per line, `#` comments.
    pub fn from_str(text: &str) -> Result<FlowConfig> {
        let mut cfg = FlowConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::InvalidParameter(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<FlowConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_str(&text)
    }

    /// Apply one `key = value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn bad(key: &str, value: &str) -> Error {
            Error::InvalidParameter(format!("cannot parse `{value}` for `{key}`"))
        }
        match key {
            "offsets" => self.offsets = parse_list(value).ok_or_else(|| bad(key, value))?,
            "sigma_var" => self.sigma_var = value.parse().map_err(|_| bad(key, value))?,
            "sigma_noise" => {
                self.noise = if value.eq_ignore_ascii_case("calibrated") {
                    NoiseSpec::Calibrated
                } else {
                    let vals: Vec<f64> = parse_list(value).ok_or_else(|| bad(key, value))?;
                    match vals.len() {
                        1 => NoiseSpec::Fixed(vals[0]),
                        _ => NoiseSpec::PerOffset(vals),
                    }
                };
            }
            "key_bits" => self.key_bits = value.parse().map_err(|_| bad(key, value))?,
            "chip_quantile" => {
                self.criterion = ReliabilityCriterion::new(
                    value.parse().map_err(|_| bad(key, value))?,
                    self.criterion.max_key_failure,
                )?;
            }
            "max_key_failure" => {
                self.criterion = ReliabilityCriterion::new(
                    self.criterion.chip_quantile,
                    value.parse().map_err(|_| bad(key, value))?,
                )?;
            }
            "sigma_err" => self.sigma_errs = parse_list(value).ok_or_else(|| bad(key, value))?,
            "attack_chips" => {
                self.attack_chips = parse_list(value).ok_or_else(|| bad(key, value))?
            }
            "candidates" => {
                self.candidate_ts = parse_list(value).ok_or_else(|| bad(key, value))?
            }
            "seed" => self.seed = value.parse().map_err(|_| bad(key, value))?,
            "cells" => self.cells = value.parse().map_err(|_| bad(key, value))?,
            "trials" => self.trials = value.parse().map_err(|_| bad(key, value))?,
            "chips" => self.chips = value.parse().map_err(|_| bad(key, value))?,
            "cell_area_um2" => self.cell_area_um2 = value.parse().map_err(|_| bad(key, value))?,
            "curve_c_max" => self.curve_c_max = value.parse().map_err(|_| bad(key, value))?,
            "calibration_lo" => {
                self.calibration_range.0 = value.parse().map_err(|_| bad(key, value))?
            }
            "calibration_hi" => {
                self.calibration_range.1 = value.parse().map_err(|_| bad(key, value))?
            }
            "calibration_step" => {
                self.calibration_step = value.parse().map_err(|_| bad(key, value))?
            }
            "tradeoff_delta_vt" => {
                self.tradeoff_delta_vt = value.parse().map_err(|_| bad(key, value))?
            }
            "tradeoff_sigma_err" => {
                self.tradeoff_sigma_err = value.parse().map_err(|_| bad(key, value))?
            }
            _ if key.starts_with("decoder_area_") => {
                let t: usize = key["decoder_area_".len()..]
                    .parse()
                    .map_err(|_| bad(key, value))?;
                self.decoder_areas
                    .insert(t, value.parse().map_err(|_| bad(key, value))?);
            }
            _ => {
                return Err(Error::InvalidParameter(format!("unknown config key `{key}`")));
            }
        }
        Ok(())
    }
}

fn parse_list<T: std::str::FromStr>(value: &str) -> Option<Vec<T>> {
    let items: Vec<&str> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return None;
    }
    items.iter().map(|s| s.parse().ok()).collect()
}
