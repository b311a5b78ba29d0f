//! Main periodicity of a yearly series from the spectral peak of a fitted AR
//! model, with bootstrap replicates of the peak.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use fdboot_core::bootstrap::{quantile_sorted, BootstrapConfig};
use fdboot_core::family::{is_causal, ArFamily};
use fdboot_core::spectral::{periodogram, TimeSeries};
use fdboot_core::whittle::{fit, Likelihood, Objective};

use crate::error::{CliError, Result};
use crate::parallel::run_session;

pub const PEAK_GRID: usize = 500;

/// `lambda_g = g pi / 500 - pi / 1000`, `g = 1..=500`: midpoints of 500 equal cells of `(0, pi)`.
pub fn peak_grid() -> Vec<f64> {
    (1..=PEAK_GRID).map(|g| g as f64 * PI / PEAK_GRID as f64 - PI / (2 * PEAK_GRID) as f64).collect()
}

/// AR spectrum shape `|1 - sum a_k e^{-ik lambda}|^{-2}`, defined for any coefficients.
fn ar_shape(a: &[f64], lambda: f64) -> f64 {
    let (mut re, mut im) = (1.0, 0.0);
    for (k, &ak) in a.iter().enumerate() {
        let x = (k + 1) as f64 * lambda;
        re -= ak * x.cos();
        im += ak * x.sin();
    }
    1.0 / (re * re + im * im)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub frequency: f64,
    pub period: f64,
    /// No interior local maximum on the grid: the largest value sits at an end.
    pub at_edge: bool,
}

/// Largest value of the AR spectral density over the peak grid.
pub fn ar_peak(coefficients: &[f64]) -> Peak {
    let grid = peak_grid();
    let (g, _) = grid
        .iter()
        .map(|&l| ar_shape(coefficients, l))
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    let frequency = grid[g];
    Peak { frequency, period: 2.0 * PI / frequency, at_edge: g == 0 || g == PEAK_GRID - 1 }
}

/// Fourier frequency with the largest periodogram ordinate.
pub fn raw_periodogram_peak(series: &TimeSeries) -> Peak {
    let i = periodogram(series);
    let (j, _) = i
        .ordinates()
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best });
    let frequency = i.grid().frequency(j as i64 + 1);
    Peak { frequency, period: 2.0 * PI / frequency, at_edge: j == 0 || j + 1 == i.ordinates().len() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

pub fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() || bins == 0 {
        return Vec::new();
    }
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin { lower: lo + k as f64 * width, upper: lo + (k + 1) as f64 * width, count })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SunspotAnalysis {
    pub n: usize,
    pub order: usize,
    pub sample_mean: f64,
    pub grid: String,
    pub raw_peak: Peak,
    pub theta_hat: Vec<f64>,
    pub theta0: Vec<f64>,
    pub peak: Peak,
    pub replicates: usize,
    pub block: usize,
    pub seed: u64,
    pub replicate_frequencies: Vec<f64>,
    pub replicate_periods: Vec<f64>,
    pub edge_replicates: usize,
    pub noncausal_replicates: usize,
    pub period_ci95: [f64; 2],
    pub frequency_ci95: [f64; 2],
    pub period_histogram: Vec<HistogramBin>,
    pub frequency_histogram: Vec<HistogramBin>,
}

/// Whittle AR(p) fit of the centred series and the spectral peak it implies.
pub fn fit_peak(series: &TimeSeries, order: usize) -> Result<(Vec<f64>, Peak)> {
    let n = series.len();
    if order == 0 || 2 * order >= n {
        return Err(CliError::Input(format!("AR order {order} must lie in [1, n/2) for n = {n}")));
    }
    let family = ArFamily::new(order);
    let lik = Likelihood::new(Objective::Standard, n)?;
    let est = fit(&lik, &family, periodogram(series).ordinates(), None)?;
    let peak = ar_peak(&est.theta[1..]);
    Ok((est.theta, peak))
}

/// Full workflow; `block` of `None` uses the default subsample length.
pub fn analyse(series: &TimeSeries, order: usize, replicates: usize, block: Option<usize>, seed: u64) -> Result<SunspotAnalysis> {
    let centered = series.centered();
    let (theta_hat, peak) = fit_peak(&centered, order)?;
    let family = ArFamily::new(order);
    let mut config = BootstrapConfig::new(replicates, seed);
    config.block = block;
    let session = fdboot_core::bootstrap::HybridSession::prepare(&centered, &family, &config)?;
    let outcome = run_session(&session)?;
    let theta0 = outcome.components.theta0.clone();
    let sn = (series.len() as f64).sqrt();
    let mut frequencies = Vec::with_capacity(replicates);
    let mut periods = Vec::with_capacity(replicates);
    let (mut edge, mut noncausal) = (0, 0);
    for l in &outcome.distribution.samples {
        let a: Vec<f64> = theta0[1..].iter().zip(&l[1..]).map(|(t, d)| t + d / sn).collect();
        if !is_causal(&a) {
            noncausal += 1;
        }
        let p = ar_peak(&a);
        edge += p.at_edge as usize;
        frequencies.push(p.frequency);
        periods.push(p.period);
    }
    let ci = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        [quantile_sorted(&s, 0.025), quantile_sorted(&s, 0.975)]
    };
    Ok(SunspotAnalysis {
        n: series.len(),
        order,
        sample_mean: series.mean(),
        grid: String::from("lambda_g = g pi/500 - pi/1000, g = 1..500"),
        raw_peak: raw_periodogram_peak(&centered),
        theta_hat,
        theta0,
        peak,
        replicates,
        block: outcome.components.block,
        seed,
        period_ci95: ci(&periods),
        frequency_ci95: ci(&frequencies),
        period_histogram: histogram(&periods, 40),
        frequency_histogram: histogram(&frequencies, 40),
        replicate_frequencies: frequencies,
        replicate_periods: periods,
        edge_replicates: edge,
        noncausal_replicates: noncausal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_interior_and_uniform() {
        let g = peak_grid();
        assert_eq!(g.len(), 500);
        assert!(g[0] > 0.0 && g[499] < PI);
        assert!((g[1] - g[0] - PI / 500.0).abs() < 1e-15);
        assert!((g[0] + g[499] - PI).abs() < 1e-14);
    }

    #[test]
    fn ar2_peak_within_one_step_of_analytic() {
        // complex roots r^{-1} e^{+-i w}: a1 = 2 r cos w, a2 = -r^2
        for (r, w) in [(0.9f64, 0.6f64), (0.95, 1.8), (0.8, 0.35)] {
            let a = [2.0 * r * w.cos(), -r * r];
            // argmax of the density: cos(lambda) = a1 (a2 - 1) / (4 a2)
            let analytic = (a[0] * (a[1] - 1.0) / (4.0 * a[1])).acos();
            let p = ar_peak(&a);
            assert!((p.frequency - analytic).abs() <= PI / 500.0, "{} vs {analytic}", p.frequency);
            assert!(!p.at_edge);
            assert_eq!(p.period, 2.0 * PI / p.frequency);
        }
    }

    #[test]
    fn monotone_spectrum_flagged() {
        let p = ar_peak(&[0.7]);
        assert!(p.at_edge);
        assert_eq!(p.frequency, peak_grid()[0]);
    }

    #[test]
    fn periodogram_peak_of_a_sinusoid() {
        let n = 320;
        let x: Vec<f64> = (0..n).map(|t| (2.0 * PI * 29.0 * t as f64 / n as f64).cos()).collect();
        let p = raw_periodogram_peak(&TimeSeries::new(x).unwrap());
        assert!((p.period - n as f64 / 29.0).abs() < 1e-9);
    }

    #[test]
    fn histogram_counts_everything() {
        let v = [1.0, 2.0, 2.5, 3.0, 10.0];
        let h = histogram(&v, 3);
        assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), 5);
        assert_eq!(h[2].count, 1);
    }

    #[test]
    fn order_checked() {
        let s = TimeSeries::new((0..10).map(|t| (t as f64).sin()).collect()).unwrap();
        assert_eq!(fit_peak(&s, 5).unwrap_err().exit_code(), 2);
        assert_eq!(fit_peak(&s, 0).unwrap_err().exit_code(), 2);
    }
}
