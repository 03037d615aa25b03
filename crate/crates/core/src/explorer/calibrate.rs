//! Transient-noise calibration against the reference offset↔code pairings.
//!
//! The cell model has one free physical parameter, σ_n. The scalar search
//! sweeps it over a grid and counts how many reference pairings the full
//! pipeline (simulate → fit → select) reproduces. No single σ_n reproduces
//! more than one pairing — the implied noise grows almost linearly with the
//! offset — so the scalar search reports its best and fails, and the
//! per-offset search below calibrates each offset independently. Those
//! per-offset values are what the flow uses by default.

use super::config::FlowConfig;
use super::candidate_codes;
use crate::bch::BchCodeSpec;
use crate::cell_sim::{simulate_population, CellPhysicalParams};
use crate::error_model::fit;
use crate::reliability::select_minimal_code_traced;
use crate::rng::StreamKey;
use crate::{Error, Result};

/// Reference pairings of threshold offset (mV) to minimal code strength.
pub const TABLE1_PAIRINGS: [(f64, usize); 5] = [
    (100.0, 42),
    (150.0, 25),
    (200.0, 18),
    (250.0, 13),
    (300.0, 11),
];

const LABEL_CALIBRATION: u64 = 0xca11b;

/// One grid point of the scalar search.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub sigma_noise: f64,
    /// Selected strength per reference offset; `None` when the fit was
    /// degenerate or no candidate passed.
    pub selections: Vec<(f64, Option<usize>)>,
    pub matches: usize,
}

/// Outcome of the scalar calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarCalibration {
    pub sigma_noise: f64,
    pub matches: usize,
}

/// Per-offset calibration entry.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetCalibration {
    pub delta_vt: f64,
    pub sigma_noise: f64,
    pub selected: Option<(usize, usize, usize)>,
    pub matched: bool,
    /// Contiguous σ_n window (1 mV granularity) reproducing the pairing.
    pub window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerOffsetCalibration {
    pub entries: Vec<OffsetCalibration>,
    pub matches: usize,
}

/// Run the pipeline at one (offset, σ_n) point and return the selected
/// code strength.
fn selected_t_at(
    config: &FlowConfig,
    candidates: &[BchCodeSpec],
    delta_vt: f64,
    sigma_noise: f64,
) -> Option<usize> {
    let key = StreamKey::new(config.seed)
        .child(LABEL_CALIBRATION)
        .child((sigma_noise * 1000.0).round() as u64)
        .child(delta_vt.round() as u64);
    let params = CellPhysicalParams::new(delta_vt, config.sigma_var, sigma_noise).ok()?;
    let data = simulate_population(&params, config.cells, config.trials, key.child(0));
    let model = fit(&data).ok()?.model;
    let trace = select_minimal_code_traced(
        &model,
        config.key_bits,
        &config.criterion,
        candidates,
        config.chips,
        key.child(1),
    )
    .ok()?;
    trace.selected.map(|c| c.t())
}

/// Exhaustive scalar grid over the configured range and step.
pub fn scalar_grid(config: &FlowConfig) -> Result<Vec<GridPoint>> {
    config.validate()?;
    let candidates = candidate_codes(&config.candidate_ts)?;
    let (lo, hi) = config.calibration_range;
    let step = config.calibration_step;
    let steps = ((hi - lo) / step).floor() as usize;
    let mut grid = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let sigma = lo + i as f64 * step;
        let selections: Vec<(f64, Option<usize>)> = TABLE1_PAIRINGS
            .iter()
            .map(|&(dvt, _)| (dvt, selected_t_at(config, &candidates, dvt, sigma)))
            .collect();
        let matches = selections
            .iter()
            .zip(&TABLE1_PAIRINGS)
            .filter(|((_, sel), (_, target))| *sel == Some(*target))
            .count();
        grid.push(GridPoint {
            sigma_noise: sigma,
            selections,
            matches,
        });
    }
    Ok(grid)
}

/// Scalar search for a single σ_n maximizing reference-pairing matches.
///
/// Fails with `CalibrationFailed` when fewer than 3 of 5 pairings match at
/// every grid point, reporting the best achieved. With this cell model that
/// is the expected outcome; use [`calibrate_noise_per_offset`] for a noise
/// table that reproduces the pairings.
pub fn calibrate_noise(config: &FlowConfig) -> Result<ScalarCalibration> {
    let grid = scalar_grid(config)?;
    let best = grid
        .iter()
        .max_by(|a, b| {
            a.matches
                .cmp(&b.matches)
                .then(b.sigma_noise.partial_cmp(&a.sigma_noise).unwrap())
        })
        .expect("nonempty grid");
    if best.matches < 3 {
        return Err(Error::CalibrationFailed {
            best_sigma_noise: best.sigma_noise,
            best_matches: best.matches,
        });
    }
    Ok(ScalarCalibration {
        sigma_noise: best.sigma_noise,
        matches: best.matches,
    })
}

/// Calibrate σ_n independently for each reference offset: coarse 4 mV scan
/// over the configured range, then a 1 mV scan of the bracketing region,
/// settling on the center of the matching window.
pub fn calibrate_noise_per_offset(config: &FlowConfig) -> Result<PerOffsetCalibration> {
    config.validate()?;
    let candidates = candidate_codes(&config.candidate_ts)?;
    let (lo, hi) = config.calibration_range;

    let entries: Vec<OffsetCalibration> = TABLE1_PAIRINGS
        .iter()
        .map(|&(dvt, target)| calibrate_one_offset(config, &candidates, dvt, target, lo, hi))
        .collect();
    let matches = entries.iter().filter(|e| e.matched).count();
    Ok(PerOffsetCalibration { entries, matches })
}

fn calibrate_one_offset(
    config: &FlowConfig,
    candidates: &[BchCodeSpec],
    delta_vt: f64,
    target: usize,
    lo: f64,
    hi: f64,
) -> OffsetCalibration {
    let eval = |sigma: f64| selected_t_at(config, candidates, delta_vt, sigma);
    // Order evaluations by how strong a code they demand: degenerate fits
    // (noise too small to observe errors) sort lowest, infeasible models
    // (noise overwhelming every candidate) highest.
    let rank = |sel: Option<usize>, sigma: f64| match sel {
        Some(t) => t as i64,
        None if sigma < (lo + hi) / 2.0 => -1,
        None => i64::MAX,
    };

    let mut coarse: Vec<(f64, Option<usize>)> = Vec::new();
    let mut sigma = lo;
    while sigma <= hi {
        coarse.push((sigma, eval(sigma)));
        sigma += 4.0;
    }

    // Fine 1 mV scan around every coarse hit or bracketing pair.
    let mut fine: Vec<(f64, Option<usize>)> = Vec::new();
    let scan = |from: f64, to: f64, fine: &mut Vec<(f64, Option<usize>)>| {
        let mut s = from.max(lo);
        while s <= to.min(hi) {
            if !fine.iter().any(|&(x, _)| (x - s).abs() < 1e-9) {
                fine.push((s, eval(s)));
            }
            s += 1.0;
        }
    };
    for (i, &(s, sel)) in coarse.iter().enumerate() {
        if sel == Some(target) {
            scan(s - 3.0, s + 3.0, &mut fine);
        } else if i + 1 < coarse.len() {
            let (s2, sel2) = coarse[i + 1];
            if rank(sel, s) < target as i64 && rank(sel2, s2) > target as i64 {
                scan(s + 1.0, s2 - 1.0, &mut fine);
            }
        }
    }
    fine.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // Longest contiguous 1 mV run matching the target.
    let mut best_run: Option<(f64, f64)> = None;
    let mut run_start: Option<f64> = None;
    let mut prev_sigma = f64::NEG_INFINITY;
    for &(s, sel) in &fine {
        if sel == Some(target) && (s - prev_sigma).abs() <= 1.0 + 1e-9 && run_start.is_some() {
            // run continues
        } else if sel == Some(target) {
            run_start = Some(s);
        } else {
            run_start = None;
        }
        if sel == Some(target) {
            let start = run_start.unwrap();
            let better = match best_run {
                Some((a, b)) => s - start > b - a,
                None => true,
            };
            if better {
                best_run = Some((start, s));
            }
        }
        prev_sigma = s;
    }

    if let Some((a, b)) = best_run {
        let center = ((a + b) / 2.0).round();
        let sel = eval(center);
        // The window center is the robust pick; fall back to an edge if
        // Monte Carlo wobble moved the boundary between scans.
        let (sigma_noise, sel) = if sel == Some(target) {
            (center, sel)
        } else {
            (a, eval(a))
        };
        let selected = sel.map(|t| spec_triplet(candidates, t));
        return OffsetCalibration {
            delta_vt,
            sigma_noise,
            selected,
            matched: sel == Some(target),
            window: Some((a, b)),
        };
    }

    // No match anywhere: report the evaluation closest to the target.
    let all: Vec<(f64, Option<usize>)> = coarse.into_iter().chain(fine).collect();
    let (sigma_noise, sel) = all
        .iter()
        .min_by_key(|&&(s, sel)| (rank(sel, s) - target as i64).abs())
        .copied()
        .unwrap();
    OffsetCalibration {
        delta_vt,
        sigma_noise,
        selected: sel.map(|t| spec_triplet(candidates, t)),
        matched: false,
        window: None,
    }
}

fn spec_triplet(candidates: &[BchCodeSpec], t: usize) -> (usize, usize, usize) {
    let code = candidates
        .iter()
        .find(|c| c.t() == t)
        .expect("selected code is a candidate");
    (code.n(), code.m(), code.t())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_pairings_are_table_shaped() {
        assert_eq!(TABLE1_PAIRINGS.len(), 5);
        assert_eq!(TABLE1_PAIRINGS[2], (200.0, 18));
    }

    #[test]
    fn selected_t_is_deterministic() {
        let mut cfg = FlowConfig::default();
        cfg.chips = 1000;
        let candidates = candidate_codes(&cfg.candidate_ts).unwrap();
        let a = selected_t_at(&cfg, &candidates, 200.0, 81.0);
        let b = selected_t_at(&cfg, &candidates, 200.0, 81.0);
        assert_eq!(a, b);
        assert!(a.is_some());
    }
}
