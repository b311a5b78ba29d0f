//! JSON reports written by the `fit` and `bootstrap` commands.

use serde::{Deserialize, Serialize};

use fdboot_core::bootstrap::BootstrapOutcome;
use fdboot_core::linalg::Matrix;

use crate::error::{CliError, Result};

pub const QUANTILE_LEVELS: [f64; 7] = [0.01, 0.025, 0.05, 0.5, 0.95, 0.975, 0.99];

pub fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub n: usize,
    pub family: String,
    pub variant: String,
    pub parameters: Vec<String>,
    pub sample_mean: f64,
    pub theta_hat: Vec<f64>,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    pub score_norm: f64,
    /// Cross-validated bandwidth of the nonparametric estimate `f_hat`.
    pub bandwidth: f64,
    /// Minimiser of the objective with `f_hat` in place of the periodogram.
    pub theta0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub level: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateSummary {
    pub name: String,
    pub estimate: f64,
    /// Quantiles of the hybrid draws `L*`.
    pub quantiles: Vec<Quantile>,
    pub ci90: [f64; 2],
    pub ci95: [f64; 2],
    /// 95% interval from the multiplicative draws alone.
    pub multiplicative_ci95: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub block: usize,
    pub b_cubed_over_n: f64,
    pub clamped_psd_mass: f64,
    pub discarded_replicates: usize,
    pub max_w_condition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub n: usize,
    pub family: String,
    pub variant: String,
    pub seed: u64,
    pub replicates: usize,
    pub bandwidth: f64,
    pub theta_hat: Vec<f64>,
    pub theta0: Vec<f64>,
    pub coordinates: Vec<CoordinateSummary>,
    pub w_star_mean: Vec<Vec<f64>>,
    pub v1_star: Vec<Vec<f64>>,
    pub sigma_plus: Vec<Vec<f64>>,
    pub c_plus: Vec<Vec<f64>>,
    pub v2_plus: Vec<Vec<f64>>,
    pub diagnostics: DiagnosticsReport,
}

fn pair((a, b): (f64, f64)) -> [f64; 2] {
    [a, b]
}

impl BootstrapReport {
    pub fn new(outcome: &BootstrapOutcome, names: &[String], family: String, variant: String, seed: u64) -> Self {
        let c = &outcome.components;
        let d = &outcome.distribution;
        let coordinates = names
            .iter()
            .enumerate()
            .map(|(k, name)| CoordinateSummary {
                name: name.clone(),
                estimate: d.theta_hat[k],
                quantiles: QUANTILE_LEVELS.iter().map(|&level| Quantile { level, value: d.quantile(k, level) }).collect(),
                ci90: pair(d.percentile_ci(k, 0.90)),
                ci95: pair(d.percentile_ci(k, 0.95)),
                multiplicative_ci95: pair(d.multiplicative_ci(k, 0.95)),
            })
            .collect();
        BootstrapReport {
            n: c.n,
            family,
            variant,
            seed,
            replicates: d.replicates(),
            bandwidth: c.bandwidth,
            theta_hat: c.theta_hat.theta.clone(),
            theta0: c.theta0.clone(),
            coordinates,
            w_star_mean: matrix_rows(&outcome.w_star_mean),
            v1_star: matrix_rows(&c.v1_star),
            sigma_plus: matrix_rows(&c.sigma_plus),
            c_plus: matrix_rows(&c.c_plus),
            v2_plus: matrix_rows(&c.v2_plus),
            diagnostics: DiagnosticsReport {
                block: c.block,
                b_cubed_over_n: outcome.diagnostics.b_cubed_over_n,
                clamped_psd_mass: outcome.diagnostics.clamped_mass,
                discarded_replicates: outcome.diagnostics.discarded,
                max_w_condition: outcome.diagnostics.max_w_condition,
            },
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Numeric(format!("cannot serialise report: {e}")))
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("bad report: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_fit() -> FitReport {
        FitReport {
            n: 100,
            family: String::from("ar:1"),
            variant: String::from("standard"),
            parameters: vec![String::from("sigma2"), String::from("a1")],
            sample_mean: 0.1 + 0.2,
            theta_hat: vec![1.0 / 3.0, -0.7999999999999999],
            objective: 1.2345678901234567e-3,
            converged: true,
            iterations: 12,
            score_norm: 3.3e-15,
            bandwidth: 0.2,
            theta0: vec![0.99, 0.5],
        }
    }

    #[test]
    fn fit_report_round_trip_is_exact() {
        let r = sample_fit();
        let text = to_json(&r).unwrap();
        let back: FitReport = from_json(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(to_json(&back).unwrap(), text);
    }

    #[test]
    fn matrix_rows_layout() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(matrix_rows(&m), vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
    }

    #[test]
    fn malformed_report_is_input_error() {
        assert_eq!(from_json::<FitReport>("{").unwrap_err().exit_code(), 2);
    }
}
