//! Command-line front end for the threshold-key design and attack analysis
//! flow.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vtkey::attacker::{self, AttackerParams, DesignPoint};
use vtkey::bch::build_code;
use vtkey::cell_sim::{simulate_population, CellPhysicalParams};
use vtkey::error_model::fit;
use vtkey::explorer::{
    self, calibrate_noise_per_offset, candidate_codes, emit_reports, end_to_end_attack_sim,
    run_flow, scalar_grid, FlowConfig,
};
use vtkey::reliability::select_minimal_code_traced;
use vtkey::rng::StreamKey;

#[derive(Parser)]
#[command(
    name = "vtkey",
    version,
    about = "Design-space and attack analysis for threshold-voltage obfuscated keys"
)]
struct Cli {
    /// Plain-text config file (`key = value`, `#` comments).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed for all randomness.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a biased cell population and print per-cell error rates.
    Simulate {
        #[arg(long)]
        delta_vt: f64,
        #[arg(long)]
        sigma_noise: Option<f64>,
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long)]
        trials: Option<u32>,
        /// Output CSV path (stdout when omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Simulate a population and fit the error-probability model.
    Fit {
        #[arg(long)]
        delta_vt: f64,
        #[arg(long)]
        sigma_noise: Option<f64>,
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long)]
        trials: Option<u32>,
    },
    /// Pick the minimal code meeting the reliability criterion at an offset.
    SelectCode {
        #[arg(long)]
        delta_vt: f64,
        #[arg(long)]
        sigma_noise: Option<f64>,
        #[arg(long)]
        chips: Option<usize>,
    },
    /// Closed-form attacker analysis for one design point.
    Attack {
        #[arg(long)]
        delta_vt: f64,
        /// Error-correction strength of the stored code.
        #[arg(long)]
        code_t: usize,
        #[arg(long)]
        sigma_err: Option<f64>,
        /// Chips measured and averaged.
        #[arg(long, default_value_t = 1)]
        chips: u32,
        /// Also print the success-vs-chips curve up to this C.
        #[arg(long)]
        curve_max: Option<u32>,
        /// Extension: model repeated measurement of one chip instead of
        /// chip averaging.
        #[arg(long)]
        single_chip_repeats: Option<u32>,
    },
    /// Run the full design flow and emit CSV reports.
    Flow {
        /// Report directory.
        #[arg(short, long, default_value = "reports")]
        out: PathBuf,
    },
    /// Reliability/security tradeoff curve at one offset.
    Tradeoff {
        #[arg(long)]
        delta_vt: Option<f64>,
        #[arg(long)]
        sigma_err: Option<f64>,
    },
    /// Empirical end-to-end attack simulation vs the closed form.
    E2e {
        #[arg(long)]
        delta_vt: f64,
        #[arg(long)]
        code_t: usize,
        #[arg(long)]
        sigma_err: Option<f64>,
        #[arg(long, default_value_t = 9)]
        chips: u32,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Search the transient-noise parameter against the reference pairings.
    Calibrate {
        /// Calibrate each offset independently instead of one global value.
        #[arg(long)]
        per_offset: bool,
    },
}

fn load_config(cli: &Cli) -> vtkey::Result<FlowConfig> {
    let mut cfg = match &cli.config {
        Some(path) => FlowConfig::from_file(path)?,
        None => FlowConfig::default(),
    };
    if std::env::args().any(|a| a == "--seed") || cli.seed != 42 {
        cfg.seed = cli.seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn noise_for(cfg: &FlowConfig, delta_vt: f64, flag: Option<f64>) -> vtkey::Result<f64> {
    match flag {
        Some(v) => Ok(v),
        None => explorer::noise_for_offset(cfg, delta_vt),
    }
}

fn run(cli: Cli) -> vtkey::Result<()> {
    let cfg = load_config(&cli)?;
    match cli.command {
        Command::Simulate {
            delta_vt,
            sigma_noise,
            cells,
            trials,
            out,
        } => {
            let sn = noise_for(&cfg, delta_vt, sigma_noise)?;
            let params = CellPhysicalParams::new(delta_vt, cfg.sigma_var, sn)?;
            let data = simulate_population(
                &params,
                cells.unwrap_or(cfg.cells),
                trials.unwrap_or(cfg.trials),
                StreamKey::new(cfg.seed),
            );
            let csv = data.to_csv();
            match out {
                Some(path) => std::fs::write(&path, csv).map_err(|source| vtkey::Error::Io {
                    path,
                    source,
                })?,
                None => print!("{csv}"),
            }
        }
        Command::Fit {
            delta_vt,
            sigma_noise,
            cells,
            trials,
        } => {
            let sn = noise_for(&cfg, delta_vt, sigma_noise)?;
            let params = CellPhysicalParams::new(delta_vt, cfg.sigma_var, sn)?;
            let data = simulate_population(
                &params,
                cells.unwrap_or(cfg.cells),
                trials.unwrap_or(cfg.trials),
                StreamKey::new(cfg.seed),
            );
            let report = fit(&data)?;
            println!("delta_vt,lambda1,lambda2,residual");
            println!("{}", report.csv_row(delta_vt));
            println!(
                "# points_used={} points_clamped={}",
                report.points_used, report.points_clamped
            );
        }
        Command::SelectCode {
            delta_vt,
            sigma_noise,
            chips,
        } => {
            let sn = noise_for(&cfg, delta_vt, sigma_noise)?;
            let params = CellPhysicalParams::new(delta_vt, cfg.sigma_var, sn)?;
            let key = StreamKey::new(cfg.seed);
            let data = simulate_population(&params, cfg.cells, cfg.trials, key.child(1));
            let report = fit(&data)?;
            let candidates = candidate_codes(&cfg.candidate_ts)?;
            let trace = select_minimal_code_traced(
                &report.model,
                cfg.key_bits,
                &cfg.criterion,
                &candidates,
                chips.unwrap_or(cfg.chips),
                key.child(2),
            )?;
            println!("delta_vt,code_t,pass,percentile_value");
            for cand in &trace.evaluated {
                println!("{}", cand.csv_row(delta_vt));
            }
            match trace.selected {
                Some(code) => println!("selected: ({},{},{})", code.n(), code.m(), code.t()),
                None => return Err(vtkey::Error::NoFeasibleCode),
            }
        }
        Command::Attack {
            delta_vt,
            code_t,
            sigma_err,
            chips,
            curve_max,
            single_chip_repeats,
        } => {
            let sigma_err = sigma_err.unwrap_or(cfg.sigma_errs[0]);
            let code = build_code(code_t)?;
            let design = DesignPoint::new(delta_vt, code, cfg.key_bits, cfg.sigma_var)?;
            let attacker_params = AttackerParams::new(sigma_err, chips)?;
            let p_re = match single_chip_repeats {
                None => attacker::misread_probability(delta_vt, cfg.sigma_var, &attacker_params),
                Some(r) => attacker::misread_probability_single_chip_repeated(
                    delta_vt,
                    cfg.sigma_var,
                    sigma_err,
                    r,
                ),
            };
            println!("p_re: {p_re:.6e}");
            println!(
                "p_rsblock: {:.6e}",
                attacker::block_read_success(&design.code, p_re)
            );
            if single_chip_repeats.is_none() {
                println!(
                    "p_rskey: {:.6e}",
                    attacker::key_read_success(&design, &attacker_params)
                );
                println!(
                    "measurements: {}",
                    attacker::measurement_cost(&design, &attacker_params)
                );
            }
            if let Some(c_max) = curve_max {
                println!("C,p_rskey");
                for (c, p) in attacker::success_vs_chips(&design, sigma_err, c_max) {
                    println!("{c},{p:.6e}");
                }
            }
        }
        Command::Flow { out } => {
            let report = run_flow(&cfg)?;
            let files = emit_reports(&report, &cfg, &out)?;
            for f in files {
                println!("wrote {}", f.display());
            }
            for row in &report.rows {
                if let Some(flag) = &row.flag {
                    println!("note: offset {} mV flagged: {flag}", row.delta_vt);
                }
            }
        }
        Command::Tradeoff {
            delta_vt,
            sigma_err,
        } => {
            let dvt = delta_vt.unwrap_or(cfg.tradeoff_delta_vt);
            let serr = sigma_err.unwrap_or(cfg.tradeoff_sigma_err);
            let mut scoped = cfg.clone();
            scoped.tradeoff_delta_vt = dvt;
            scoped.tradeoff_sigma_err = serr;
            if !scoped.offsets.contains(&dvt) {
                scoped.offsets.push(dvt);
            }
            let report = run_flow(&scoped)?;
            println!("t,first_percentile_key_failure,attacker_success");
            for p in &report.tradeoff {
                println!(
                    "{},{:.6e},{:.6e}",
                    p.t, p.first_percentile_key_failure, p.attacker_success
                );
            }
        }
        Command::E2e {
            delta_vt,
            code_t,
            sigma_err,
            chips,
            trials,
        } => {
            let sigma_err = sigma_err.unwrap_or(cfg.sigma_errs[0]);
            let code = build_code(code_t)?;
            let design = DesignPoint::new(delta_vt, code, cfg.key_bits, cfg.sigma_var)?;
            let attacker_params = AttackerParams::new(sigma_err, chips)?;
            let closed = attacker::key_read_success(&design, &attacker_params);
            let sim =
                end_to_end_attack_sim(&design, &attacker_params, trials, StreamKey::new(cfg.seed))?;
            println!(
                "empirical: {}/{} = {:.4} (95% CI [{:.4}, {:.4}])",
                sim.successes, sim.trials, sim.rate, sim.ci_low, sim.ci_high
            );
            println!("closed_form: {closed:.6e}");
            let covered = sim.ci_low <= closed && closed <= sim.ci_high;
            println!("ci_covers_closed_form: {covered}");
        }
        Command::Calibrate { per_offset } => {
            if per_offset {
                let cal = calibrate_noise_per_offset(&cfg)?;
                println!("delta_vt,sigma_noise,selected,target_matched,window");
                for e in &cal.entries {
                    let sel = e
                        .selected
                        .map(|(n, m, t)| format!("({n};{m};{t})"))
                        .unwrap_or_default();
                    let window = e
                        .window
                        .map(|(a, b)| format!("[{a};{b}]"))
                        .unwrap_or_default();
                    println!(
                        "{},{},{sel},{},{window}",
                        e.delta_vt, e.sigma_noise, e.matched
                    );
                }
                println!("matches: {}/5", cal.matches);
            } else {
                let grid = scalar_grid(&cfg)?;
                println!("sigma_noise,matches,selections");
                for point in &grid {
                    let sels = point
                        .selections
                        .iter()
                        .map(|(d, t)| {
                            format!("{d}:{}", t.map(|t| t.to_string()).unwrap_or("-".into()))
                        })
                        .collect::<Vec<_>>()
                        .join(" ");
                    println!("{},{},{sels}", point.sigma_noise, point.matches);
                }
                match explorer::calibrate_noise(&cfg) {
                    Ok(cal) => println!(
                        "calibrated sigma_noise: {} mV ({} of 5 pairings)",
                        cal.sigma_noise, cal.matches
                    ),
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
