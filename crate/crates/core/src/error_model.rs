//! Heterogeneous cell-error-probability model.
//!
//! The distribution of per-cell error probabilities Pe across a population
//! is captured by two parameters:
//!
//! ```text
//! cdf_Pe(x) = Φ(λ1 · Φ⁻¹(x) + λ2)
//! ```
//!
//! which is exactly the law of Pe = Φ(−M/σ_n) when the latent mismatch M is
//! Gaussian: λ1 = σ_n/σ_M and λ2 = μ_M/σ_M. Fitting happens in the
//! probit-probit domain, where the model is a straight line.

use rand::Rng;
use rand_distr::Open01;

pub use crate::normal::{phi, phi_inv};

use crate::cell_sim::EmpiricalErrorData;
use crate::{Error, Result};

/// Two-parameter error-probability distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaesModel {
    lambda1: f64,
    lambda2: f64,
}

impl MaesModel {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        if !(lambda1 > 0.0) || !lambda1.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda1 must be positive and finite, got {lambda1}"
            )));
        }
        if !lambda2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda2 must be finite, got {lambda2}"
            )));
        }
        Ok(MaesModel { lambda1, lambda2 })
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }
}

/// Diagnostics from a model fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: MaesModel,
    /// Root-mean-square residual in the probit-probit domain.
    pub residual: f64,
    pub points_used: usize,
    pub points_clamped: usize,
}

impl FitReport {
    /// CSV row `delta_vt,lambda1,lambda2,residual`.
    pub fn csv_row(&self, delta_vt: f64) -> String {
        format!(
            "{delta_vt},{:.6},{:.6},{:.6}",
            self.model.lambda1, self.model.lambda2, self.residual
        )
    }
}

/// CDF of the cell error probability, with limit conventions at 0 and 1.
pub fn cdf_pe(model: &MaesModel, x: f64) -> f64 {
    assert!((0.0..=1.0).contains(&x), "cdf_pe domain is [0,1], got {x}");
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    phi(model.lambda1 * phi_inv(x) + model.lambda2)
}

/// Fit (λ1, λ2) to an empirical population by least squares in the
/// probit-probit domain.
///
/// Sorted sample values map to the plotting positions (i − ½)/n, and exact
/// 0/1 probabilities are clamped to 1/(2·trials) and 1 − 1/(2·trials).
/// Fails with `DegenerateData` when fewer than two distinct values remain.
pub fn fit(data: &EmpiricalErrorData) -> Result<FitReport> {
    let n = data.error_probs.len();
    if n < 2 {
        return Err(Error::DegenerateData(format!(
            "need at least 2 cells, got {n}"
        )));
    }
    let clamp = 1.0 / (2.0 * f64::from(data.trials_per_cell));
    let mut points_clamped = 0usize;
    let mut probs: Vec<f64> = data
        .error_probs
        .iter()
        .map(|&p| {
            if p == 0.0 {
                points_clamped += 1;
                clamp
            } else if p == 1.0 {
                points_clamped += 1;
                1.0 - clamp
            } else {
                p
            }
        })
        .collect();
    probs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    if probs.first() == probs.last() {
        return Err(Error::DegenerateData(
            "all error probabilities identical after clamping".into(),
        ));
    }

    // Probit-probit regression: Φ⁻¹((i−½)/n) against Φ⁻¹(p_(i)).
    let u: Vec<f64> = probs.iter().map(|&p| phi_inv(p)).collect();
    let y: Vec<f64> = (1..=n)
        .map(|i| phi_inv((i as f64 - 0.5) / n as f64))
        .collect();
    let u_mean = u.iter().sum::<f64>() / n as f64;
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let mut suy = 0.0;
    let mut suu = 0.0;
    for (&ui, &yi) in u.iter().zip(&y) {
        suy += (ui - u_mean) * (yi - y_mean);
        suu += (ui - u_mean) * (ui - u_mean);
    }
    if suu <= 0.0 || !suy.is_finite() {
        return Err(Error::DegenerateData(
            "no spread in probit-transformed probabilities".into(),
        ));
    }
    let lambda1 = suy / suu;
    let lambda2 = y_mean - lambda1 * u_mean;
    let model = MaesModel::new(lambda1, lambda2)?;
    let ss: f64 = u
        .iter()
        .zip(&y)
        .map(|(&ui, &yi)| (yi - (lambda1 * ui + lambda2)).powi(2))
        .sum();
    Ok(FitReport {
        model,
        residual: (ss / n as f64).sqrt(),
        points_used: n,
        points_clamped,
    })
}

/// Inverse-transform sampling of cell error probabilities.
///
/// Each sample is Φ((Φ⁻¹(U) − λ2)/λ1) with U uniform on (0, 1); outputs are
/// kept inside the open interval (floating-point underflow is clamped to the
/// smallest positive normal).
pub fn sample_pe<R: Rng + ?Sized>(model: &MaesModel, count: usize, rng: &mut R) -> Vec<f64> {
    (0..count)
        .map(|_| {
            let u: f64 = rng.sample(Open01);
            let z = phi_inv(u);
            phi((z - model.lambda2) / model.lambda1)
                .clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    #[test]
    fn identity_model_is_uniform() {
        let m = MaesModel::new(1.0, 0.0).unwrap();
        assert!((cdf_pe(&m, 0.3) - 0.3).abs() < 1e-12);
        assert!((cdf_pe(&m, 0.77) - 0.77).abs() < 1e-12);
    }

    #[test]
    fn midpoint_is_phi_of_lambda2() {
        for (l1, l2) in [(0.5, 1.0), (2.0, -0.7), (0.9428, 4.714)] {
            let m = MaesModel::new(l1, l2).unwrap();
            assert!((cdf_pe(&m, 0.5) - phi(l2)).abs() < 1e-13);
        }
    }

    #[test]
    fn tail_example_value() {
        // λ1=0.9428, λ2=4.714 at x=1e-3: Φ(0.9428·(−3.0902) + 4.714).
        let m = MaesModel::new(0.9428, 4.714).unwrap();
        let got = cdf_pe(&m, 1e-3);
        assert!((got - 0.964111424201172).abs() < 1e-9, "{got}");
        assert!((got - 0.9641).abs() < 2e-4);
    }

    #[test]
    fn cdf_endpoints_and_monotonicity() {
        let m = MaesModel::new(0.8, 2.0).unwrap();
        assert_eq!(cdf_pe(&m, 0.0), 0.0);
        assert_eq!(cdf_pe(&m, 1.0), 1.0);
        let mut prev = 0.0;
        for i in 1..1000 {
            let v = cdf_pe(&m, i as f64 / 1000.0);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn rejects_bad_lambda() {
        assert!(MaesModel::new(0.0, 1.0).is_err());
        assert!(MaesModel::new(-1.0, 1.0).is_err());
        assert!(MaesModel::new(f64::NAN, 1.0).is_err());
    }

    fn exact_data(probs: Vec<f64>) -> EmpiricalErrorData {
        let cells = probs.len();
        EmpiricalErrorData {
            error_probs: probs,
            cells,
            trials_per_cell: u32::MAX,
        }
    }

    #[test]
    fn fit_recovers_synthetic_model() {
        // 512 exact inverse-transform samples from (0.8, 2.0); fixed seed.
        let truth = MaesModel::new(0.8, 2.0).unwrap();
        let mut rng = StreamKey::new(16).rng(0);
        let pe = sample_pe(&truth, 512, &mut rng);
        let report = fit(&exact_data(pe)).unwrap();
        assert!(
            (report.model.lambda1() - 0.8).abs() < 0.05,
            "lambda1 {}",
            report.model.lambda1()
        );
        assert!(
            (report.model.lambda2() - 2.0).abs() < 0.05,
            "lambda2 {}",
            report.model.lambda2()
        );
        assert_eq!(report.points_clamped, 0);
    }

    #[test]
    fn fit_matches_latent_cell_model() {
        // Exact per-cell probabilities from the latent model at Δ=200,
        // σ_var=30, σ_n=40 : λ1 = σ_n/(√2·σ_var), λ2 = Δ/(√2·σ_var).
        use crate::cell_sim::{error_probability, sample_cell, CellPhysicalParams};
        let params = CellPhysicalParams::new(200.0, 30.0, 40.0).unwrap();
        let mut rng = StreamKey::new(22).rng(0);
        let pe: Vec<f64> = (0..512)
            .map(|_| {
                let cell = sample_cell(&params, &mut rng);
                error_probability(&cell, &params)
            })
            .collect();
        let report = fit(&exact_data(pe)).unwrap();
        let l1_want = 40.0 / params.mismatch_sigma();
        let l2_want = 200.0 / params.mismatch_sigma();
        assert!(
            (report.model.lambda1() / l1_want - 1.0).abs() < 0.15,
            "lambda1 {} want {l1_want}",
            report.model.lambda1()
        );
        assert!(
            (report.model.lambda2() / l2_want - 1.0).abs() < 0.15,
            "lambda2 {} want {l2_want}",
            report.model.lambda2()
        );
    }

    #[test]
    fn probit_linear_points_fit_exactly() {
        // Three points that lie exactly on the probit line of (1.3, 0.4).
        let (l1, l2) = (1.3, 0.4);
        let n = 3;
        let probs: Vec<f64> = (1..=n)
            .map(|i| {
                let y = phi_inv((i as f64 - 0.5) / n as f64);
                phi((y - l2) / l1)
            })
            .collect();
        let report = fit(&exact_data(probs)).unwrap();
        assert!(report.residual < 1e-10, "residual {}", report.residual);
        assert!((report.model.lambda1() - l1).abs() < 1e-9);
        assert!((report.model.lambda2() - l2).abs() < 1e-9);
    }

    #[test]
    fn fit_counts_clamped_points() {
        let data = EmpiricalErrorData {
            error_probs: vec![0.0, 0.0, 0.01, 0.2, 0.5, 1.0],
            cells: 6,
            trials_per_cell: 100,
        };
        let report = fit(&data).unwrap();
        assert_eq!(report.points_clamped, 3);
        assert_eq!(report.points_used, 6);
    }

    #[test]
    fn fit_rejects_identical_data() {
        let data = EmpiricalErrorData {
            error_probs: vec![0.0; 64],
            cells: 64,
            trials_per_cell: 300,
        };
        assert!(matches!(fit(&data), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn samples_stay_in_open_interval() {
        let m = MaesModel::new(1e-4, 8.0).unwrap();
        let mut rng = StreamKey::new(23).rng(0);
        for p in sample_pe(&m, 1000, &mut rng) {
            assert!(p > 0.0 && p < 1.0);
        }
    }

    #[test]
    fn large_lambda2_pushes_samples_tiny() {
        let m = MaesModel::new(1.0, 10.0).unwrap();
        let mut rng = StreamKey::new(24).rng(0);
        let pe = sample_pe(&m, 10_000, &mut rng);
        assert!(pe.iter().all(|&p| p < 1e-6));
    }

    #[test]
    fn identity_samples_look_uniform() {
        let m = MaesModel::new(1.0, 0.0).unwrap();
        let mut rng = StreamKey::new(25).rng(0);
        let mut pe = sample_pe(&m, 10_000, &mut rng);
        pe.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let n = pe.len() as f64;
        let ks = pe
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let hi = (i as f64 + 1.0) / n - x;
                let lo = x - i as f64 / n;
                hi.max(lo)
            })
            .fold(0.0f64, f64::max);
        assert!(ks < 0.02, "KS statistic {ks}");
    }

    #[test]
    fn fit_idempotence_at_10k() {
        let truth = MaesModel::new(1.4, 3.2).unwrap();
        let mut rng = StreamKey::new(26).rng(0);
        let pe = sample_pe(&truth, 10_000, &mut rng);
        let report = fit(&exact_data(pe)).unwrap();
        let refit = fit(&exact_data(sample_pe(&report.model, 10_000, &mut rng))).unwrap();
        assert!((refit.model.lambda1() / 1.4 - 1.0).abs() < 0.10);
        assert!((refit.model.lambda2() / 3.2 - 1.0).abs() < 0.10);
    }
}
