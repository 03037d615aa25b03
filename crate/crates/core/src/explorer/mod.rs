//! Pipeline orchestration: calibrate, sweep offsets, select codes, score
//! security and cost, validate the closed forms empirically, emit reports.

mod attack_sim;
mod calibrate;
mod config;
mod report;

pub use attack_sim::{end_to_end_attack_sim, AttackSimResult};
pub use calibrate::{
    calibrate_noise, calibrate_noise_per_offset, scalar_grid, GridPoint, OffsetCalibration,
    PerOffsetCalibration, ScalarCalibration, TABLE1_PAIRINGS,
};
pub use config::{FlowConfig, NoiseSpec, CALIBRATED_SIGMA_NOISE_MV};
pub use report::emit_reports;

use std::collections::BTreeMap;

use crate::attacker::{self, AttackerParams, DesignPoint};
use crate::bch::{build_code, BchCodeSpec};
use crate::cell_sim::{simulate_population, CellPhysicalParams};
use crate::error_model::{fit, FitReport};
use crate::reliability::{select_minimal_code_traced, CandidateResult, KeyFailureDistribution};
use crate::rng::StreamKey;
use crate::{Error, Result};

// Child labels for the flow's stream hierarchy.
const LABEL_POPULATION: u64 = 1;
const LABEL_SELECTION: u64 = 2;
const LABEL_TRADEOFF: u64 = 3;

/// Area accounting for one design point.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaSummary {
    pub cells: usize,
    /// Cell array area, µm², rounded to the nearest integer.
    pub cell_area_um2: f64,
    /// Decoder area, µm², when a constant is provided for this t.
    pub decoder_area_um2: Option<f64>,
    /// Cells + decoder, µm², rounded.
    pub total_area_um2: Option<f64>,
}

/// Cells and silicon area for storing a key with the given code.
pub fn area_summary(
    code: &BchCodeSpec,
    key_bits: usize,
    cell_area_um2: f64,
    decoder_areas: &BTreeMap<usize, f64>,
) -> AreaSummary {
    let cells = code.cells_for_key(key_bits);
    let raw_cell_area = cells as f64 * cell_area_um2;
    let decoder = decoder_areas.get(&code.t()).copied();
    AreaSummary {
        cells,
        cell_area_um2: raw_cell_area.round(),
        decoder_area_um2: decoder,
        total_area_um2: decoder.map(|d| (raw_cell_area + d).round()),
    }
}

/// Attacker-side figures for one (σ_err, C) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackerFigure {
    pub sigma_err: f64,
    pub chips: u32,
    pub p_rskey: f64,
    pub measurement_cost: u64,
}

/// Everything the flow learned about one threshold offset.
#[derive(Debug, Clone)]
pub struct DesignRow {
    pub delta_vt: f64,
    pub sigma_noise: f64,
    pub fit: Option<FitReport>,
    /// Every candidate evaluated during selection, ascending t.
    pub selection: Vec<CandidateResult>,
    pub selected: Option<BchCodeSpec>,
    pub area: Option<AreaSummary>,
    /// Criterion quantile of the selected code's key-failure distribution.
    pub criterion_percentile: Option<f64>,
    pub attacker: Vec<AttackerFigure>,
    pub key_failures: Option<KeyFailureDistribution>,
    /// Why the row has no selected code, when it does not.
    pub flag: Option<String>,
}

/// One point of the reliability/security tradeoff curve.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub t: usize,
    pub first_percentile_key_failure: f64,
    pub attacker_success: f64,
}

/// Flow output: one row per offset plus reproduction metadata.
#[derive(Debug, Clone)]
pub struct Report {
    pub rows: Vec<DesignRow>,
    pub tradeoff: Vec<TradeoffPoint>,
    pub seed: u64,
    pub sigma_noise_source: String,
    pub tool_version: &'static str,
}

/// Build the candidate code list from configured strengths, ascending and
/// deduplicated by effective capability.
pub fn candidate_codes(candidate_ts: &[usize]) -> Result<Vec<BchCodeSpec>> {
    let mut codes: Vec<BchCodeSpec> = Vec::new();
    let mut ts: Vec<usize> = candidate_ts.to_vec();
    ts.sort_unstable();
    for t in ts {
        let code = build_code(t)?;
        if codes.last().map(BchCodeSpec::t) != Some(code.t()) {
            codes.push(code);
        }
    }
    Ok(codes)
}

/// Run the full design flow: per offset, simulate a population, fit the
/// error model, select the minimal code meeting the criterion, and score
/// area, attacker success, and measurement cost. Offsets with no feasible
/// code (or a degenerate fit) come back as flagged rows.
pub fn run_flow(config: &FlowConfig) -> Result<Report> {
    config.validate()?;
    let key = StreamKey::new(config.seed);
    let sigma_noise = config.noise.resolve(&config.offsets)?;
    let candidates = candidate_codes(&config.candidate_ts)?;

    let mut rows = Vec::with_capacity(config.offsets.len());
    for (oi, (&delta_vt, &sn)) in config.offsets.iter().zip(&sigma_noise).enumerate() {
        let okey = key.child(oi as u64);
        let params = CellPhysicalParams::new(delta_vt, config.sigma_var, sn)?;
        let data = simulate_population(
            &params,
            config.cells,
            config.trials,
            okey.child(LABEL_POPULATION),
        );

        let fit_report = match fit(&data) {
            Ok(r) => r,
            Err(e) => {
                rows.push(DesignRow {
                    delta_vt,
                    sigma_noise: sn,
                    fit: None,
                    selection: Vec::new(),
                    selected: None,
                    area: None,
                    criterion_percentile: None,
                    attacker: Vec::new(),
                    key_failures: None,
                    flag: Some(format!("fit failed: {e}")),
                });
                continue;
            }
        };

        let trace = select_minimal_code_traced(
            &fit_report.model,
            config.key_bits,
            &config.criterion,
            &candidates,
            config.chips,
            okey.child(LABEL_SELECTION),
        )?;

        let (selected, area, percentile, attacker_figures, flag) = match &trace.selected {
            Some(code) => {
                let area = area_summary(
                    code,
                    config.key_bits,
                    config.cell_area_um2,
                    &config.decoder_areas,
                );
                let percentile = trace
                    .evaluated
                    .last()
                    .map(|c| c.percentile)
                    .expect("selection evaluated at least one candidate");
                let design =
                    DesignPoint::new(delta_vt, code.clone(), config.key_bits, config.sigma_var)?;
                let mut figures = Vec::new();
                for &sigma_err in &config.sigma_errs {
                    for &chips in &config.attack_chips {
                        let attacker = AttackerParams::new(sigma_err, chips)?;
                        figures.push(AttackerFigure {
                            sigma_err,
                            chips,
                            p_rskey: attacker::key_read_success(&design, &attacker),
                            measurement_cost: attacker::measurement_cost(&design, &attacker),
                        });
                    }
                }
                (Some(code.clone()), Some(area), Some(percentile), figures, None)
            }
            None => (
                None,
                None,
                None,
                Vec::new(),
                Some("no feasible code".to_string()),
            ),
        };

        rows.push(DesignRow {
            delta_vt,
            sigma_noise: sn,
            fit: Some(fit_report),
            selection: trace.evaluated,
            selected,
            area,
            criterion_percentile: percentile,
            attacker: attacker_figures,
            key_failures: trace.selected_distribution,
            flag,
        });
    }

    let tradeoff = tradeoff_from_rows(config, &rows)?;

    Ok(Report {
        rows,
        tradeoff,
        seed: config.seed,
        sigma_noise_source: match &config.noise {
            NoiseSpec::Calibrated => "calibrated".to_string(),
            NoiseSpec::Fixed(v) => format!("fixed {v}"),
            NoiseSpec::PerOffset(_) => "per-offset".to_string(),
        },
        tool_version: env!("CARGO_PKG_VERSION"),
    })
}

// Tradeoff curve anchored at the flow's own selection for the configured
// tradeoff offset, descending t from there.
fn tradeoff_from_rows(config: &FlowConfig, rows: &[DesignRow]) -> Result<Vec<TradeoffPoint>> {
    let anchor = rows
        .iter()
        .find(|r| r.delta_vt == config.tradeoff_delta_vt && r.selected.is_some());
    let anchor = match anchor {
        Some(row) => row,
        None => return Ok(Vec::new()),
    };
    let t_max = anchor.selected.as_ref().unwrap().t();
    let mut ts: Vec<usize> = candidate_codes(&config.candidate_ts)?
        .iter()
        .map(|c| c.t())
        .filter(|&t| t <= t_max)
        .collect();
    ts.sort_unstable_by(|a, b| b.cmp(a));
    tradeoff_curve(config, config.tradeoff_delta_vt, config.tradeoff_sigma_err, &ts)
}

/// Noise level for one offset under the configured spec; per-offset lists
/// require the offset to be configured.
pub fn noise_for_offset(config: &FlowConfig, delta_vt: f64) -> Result<f64> {
    match &config.noise {
        NoiseSpec::PerOffset(_) => {
            let resolved = config.noise.resolve(&config.offsets)?;
            config
                .offsets
                .iter()
                .position(|&d| d == delta_vt)
                .map(|i| resolved[i])
                .ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "offset {delta_vt} has no per-offset sigma_noise entry"
                    ))
                })
        }
        _ => Ok(config.noise.resolve(&[delta_vt])?[0]),
    }
}

/// Reliability/security tradeoff: for each error-correction strength (given
/// descending from the criterion-satisfying code), the criterion-quantile
/// key failure and the attacker's key readout success.
pub fn tradeoff_curve(
    config: &FlowConfig,
    delta_vt: f64,
    sigma_err: f64,
    t_values: &[usize],
) -> Result<Vec<TradeoffPoint>> {
    if t_values.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidParameter(
            "tradeoff t values must be descending".into(),
        ));
    }
    let offset_index = config
        .offsets
        .iter()
        .position(|&d| d == delta_vt)
        .unwrap_or(0);
    let sn = noise_for_offset(config, delta_vt)?;
    let key = StreamKey::new(config.seed).child(LABEL_TRADEOFF);
    let params = CellPhysicalParams::new(delta_vt, config.sigma_var, sn)?;
    let data = simulate_population(
        &params,
        config.cells,
        config.trials,
        StreamKey::new(config.seed)
            .child(offset_index as u64)
            .child(LABEL_POPULATION),
    );
    let model = fit(&data)?.model;

    let mut points = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let code = build_code(t)?;
        let dist = crate::reliability::key_failure_distribution(
            &model,
            &code,
            config.key_bits,
            config.chips,
            key.child(t as u64),
        );
        let design = DesignPoint::new(delta_vt, code, config.key_bits, config.sigma_var)?;
        let attacker = AttackerParams::new(sigma_err, 1)?;
        points.push(TradeoffPoint {
            t,
            first_percentile_key_failure: dist.quantile(config.criterion.chip_quantile),
            attacker_success: attacker::key_read_success(&design, &attacker),
        });
    }
    Ok(points)
}
