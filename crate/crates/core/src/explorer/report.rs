//! CSV/plain-text report emission. Output is byte-identical for identical
//! (config, seed) pairs, whatever the worker count.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{FlowConfig, Report};
use crate::attacker::{self, DesignPoint};
use crate::{Error, Result};

fn fmt_mv(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v}")
    }
}

fn opt_int(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.0}")).unwrap_or_default()
}

fn opt_sci(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_default()
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Write `table1.csv`, `tradeoff.csv`, `success_vs_chips.csv`, one
/// `keyfail_dist_<dvt>.csv` per offset, and `summary.txt` into `out_dir`.
/// Returns the paths written.
pub fn emit_reports(report: &Report, config: &FlowConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if report.rows.is_empty() {
        return Err(Error::InvalidParameter(
            "report has no design rows; nothing to emit".into(),
        ));
    }
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();

    // table1.csv
    let mut table = String::from(
        "delta_vt,n,m,t,cells,cell_area_um2,decoder_area_um2,total_area_um2,criterion_percentile,p_rskey\n",
    );
    for row in &report.rows {
        let (n, m, t) = match &row.selected {
            Some(code) => (
                code.n().to_string(),
                code.m().to_string(),
                code.t().to_string(),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        let area = row.area.as_ref();
        writeln!(
            table,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_mv(row.delta_vt),
            n,
            m,
            t,
            area.map(|a| a.cells.to_string()).unwrap_or_default(),
            opt_int(area.map(|a| a.cell_area_um2)),
            opt_int(area.and_then(|a| a.decoder_area_um2)),
            opt_int(area.and_then(|a| a.total_area_um2)),
            opt_sci(row.criterion_percentile),
            opt_sci(row.attacker.first().map(|f| f.p_rskey)),
        )
        .unwrap();
    }
    written.push(write_file(out_dir, "table1.csv", &table)?);

    // tradeoff.csv
    let mut tradeoff = String::from("t,first_percentile_key_failure,attacker_success\n");
    for point in &report.tradeoff {
        writeln!(
            tradeoff,
            "{},{:.6e},{:.6e}",
            point.t, point.first_percentile_key_failure, point.attacker_success
        )
        .unwrap();
    }
    written.push(write_file(out_dir, "tradeoff.csv", &tradeoff)?);

    // success_vs_chips.csv — one curve per offset with a selected code.
    let mut curve = String::from("delta_vt,C,p_rskey\n");
    for row in &report.rows {
        if let Some(code) = &row.selected {
            let design = DesignPoint::new(
                row.delta_vt,
                code.clone(),
                config.key_bits,
                config.sigma_var,
            )?;
            let sigma_err = config.sigma_errs[0];
            for (c, p) in attacker::success_vs_chips(&design, sigma_err, config.curve_c_max) {
                writeln!(curve, "{},{},{:.6e}", fmt_mv(row.delta_vt), c, p).unwrap();
            }
        }
    }
    written.push(write_file(out_dir, "success_vs_chips.csv", &curve)?);

    // keyfail_dist_<dvt>.csv
    for row in &report.rows {
        if let Some(dist) = &row.key_failures {
            let name = format!("keyfail_dist_{}.csv", fmt_mv(row.delta_vt));
            written.push(write_file(out_dir, &name, &dist.to_csv())?);
        }
    }

    // summary.txt
    let mut summary = String::new();
    writeln!(summary, "threshold-key design flow summary").unwrap();
    writeln!(summary, "tool_version: {}", report.tool_version).unwrap();
    writeln!(summary, "seed: {}", report.seed).unwrap();
    writeln!(summary, "sigma_noise_source: {}", report.sigma_noise_source).unwrap();
    writeln!(
        summary,
        "criterion: quantile {} below {:.1e}",
        config.criterion.chip_quantile, config.criterion.max_key_failure
    )
    .unwrap();
    writeln!(summary, "key_bits: {}", config.key_bits).unwrap();
    writeln!(summary).unwrap();
    writeln!(summary, "fits (delta_vt,lambda1,lambda2,residual):").unwrap();
    for row in &report.rows {
        match &row.fit {
            Some(f) => writeln!(summary, "  {}", f.csv_row(row.delta_vt)).unwrap(),
            None => writeln!(summary, "  {},,,", fmt_mv(row.delta_vt)).unwrap(),
        }
    }
    writeln!(summary).unwrap();
    writeln!(summary, "selection (delta_vt,code_t,pass,percentile_value):").unwrap();
    for row in &report.rows {
        for cand in &row.selection {
            writeln!(summary, "  {}", cand.csv_row(row.delta_vt)).unwrap();
        }
        if let Some(flag) = &row.flag {
            writeln!(summary, "  {} flagged: {flag}", fmt_mv(row.delta_vt)).unwrap();
        }
    }
    writeln!(summary).unwrap();
    writeln!(summary, "attacker (delta_vt,sigma_err,C,p_rskey,measurements):").unwrap();
    for row in &report.rows {
        for fig in &row.attacker {
            writeln!(
                summary,
                "  {},{},{},{:.6e},{}",
                fmt_mv(row.delta_vt),
                fmt_mv(fig.sigma_err),
                fig.chips,
                fig.p_rskey,
                fig.measurement_cost
            )
            .unwrap();
        }
    }
    writeln!(summary).unwrap();
    writeln!(
        summary,
        "sigma_noise per offset (mV): {}",
        report
            .rows
            .iter()
            .map(|r| format!("{}:{}", fmt_mv(r.delta_vt), r.sigma_noise))
            .collect::<Vec<_>>()
            .join(" ")
    )
    .unwrap();
    writeln!(summary, "decoder areas are provided constants, not synthesized").unwrap();
    written.push(write_file(out_dir, "summary.txt", &summary)?);

    Ok(written)
}
