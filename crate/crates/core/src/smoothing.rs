//! Kernel-smoothed periodogram, cross-validated bandwidth and the
//! subsample-averaged spectrum.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::spectral::{FourierGrid, Periodogram, SubsamplePeriodograms, TaperSpec, TimeSeries};

/// Relative positivity floor applied to spectral estimates.
pub const FLOOR: f64 = 1e-6;

/// Bartlett-Priestley window `K(u/h)/h` with
/// `K(x) = 3/(4 pi) (1 - (x/pi)^2)` on `|x| <= pi`.
pub fn bartlett_priestley_weight(u: f64, h_bw: f64) -> Result<f64> {
    if !(h_bw > 0.0) || !h_bw.is_finite() {
        return Err(invalid!("bandwidth must be positive, got {h_bw}"));
    }
    Ok(bp_kernel(u / h_bw) / h_bw)
}

fn bp_kernel(x: f64) -> f64 {
    if x.abs() > PI {
        0.0
    } else {
        let r = x / PI;
        3.0 / (4.0 * PI) * (1.0 - r * r)
    }
}

/// Nonparametric spectral density estimate known at the Fourier frequencies
/// `lambda_1..lambda_N` of a length-`n` sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensityEstimate {
    grid: FourierGrid,
    bandwidth: f64,
    values: Vec<f64>,
}

impl SpectralDensityEstimate {
    /// Estimate with given ordinates at `j = 1..=N`; the positivity floor is applied.
    pub fn from_values(grid: FourierGrid, bandwidth: f64, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.half() {
            return Err(invalid!("expected {} values, got {}", grid.half(), values.len()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid!("spectral values must be finite and non-negative"));
        }
        apply_floor(&mut values);
        if values.iter().all(|&v| v <= 0.0) {
            return Err(invalid!("spectral estimate is identically zero"));
        }
        Ok(SpectralDensityEstimate { grid, bandwidth, values })
    }

    /// Samples a known density on the grid (used when `f_hat` is an oracle).
    pub fn from_density(grid: FourierGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.positive_frequencies().into_iter().map(f).collect();
        Self::from_values(grid, 0.0, values)
    }

    pub fn grid(&self) -> FourierGrid {
        self.grid
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Values at `lambda_1..lambda_N`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at the grid index `j` (any integer, symmetric and periodic).
    /// At multiples of `n` this is the interpolated value `f_hat_1`.
    pub fn at_index(&self, j: i64) -> f64 {
        let n = self.grid.n() as i64;
        let r = j.rem_euclid(n);
        let k = r.min(n - r).max(1);
        self.values[(k - 1) as usize]
    }

    /// Periodic linear interpolation between grid values.
    pub fn eval(&self, lambda: f64) -> f64 {
        let n = self.grid.n() as f64;
        let big_n = self.values.len();
        let mut x = lambda.abs() % (2.0 * PI);
        if x > PI {
            x = 2.0 * PI - x;
        }
        let pos = x * n / (2.0 * PI);
        if pos <= 1.0 {
            return self.values[0];
        }
        if pos >= big_n as f64 {
            return self.values[big_n - 1];
        }
        let lo = pos.floor() as usize;
        let w = pos - lo as f64;
        if w == 0.0 {
            return self.values[lo - 1];
        }
        (1.0 - w) * self.values[lo - 1] + w * self.values[lo]
    }

    /// Values at `lambda_{j,b}` for `j = 1..=b/2`.
    pub fn on_grid(&self, b: usize) -> Vec<f64> {
        if b == self.grid.n() {
            return self.values.clone();
        }
        (1..=b / 2).map(|j| self.eval(2.0 * PI * j as f64 / b as f64)).collect()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

fn apply_floor(values: &mut [f64]) {
    let max = values.iter().copied().fold(0.0, f64::max);
    let floor = FLOOR * max;
    for v in values.iter_mut() {
        if *v < floor {
            *v = floor;
        }
    }
}

fn half_window(h_bw: f64, n: usize) -> usize {
    let k = (h_bw * n as f64 / (2.0 * PI) + 1e-9).floor() as usize;
    k.min(n / 2)
}

fn kernel_weights(h_bw: f64, n: usize) -> Vec<f64> {
    let kmax = half_window(h_bw, n);
    let scale = h_bw / PI;
    (0..=kmax)
        .map(|k| bp_kernel(2.0 * PI * k as f64 / n as f64 / scale) / scale)
        .collect()
}

fn folded(j: i64, n: i64) -> i64 {
    let r = j.rem_euclid(n);
    r.min(n - r)
}

/// Weighted local average at `j`, skipping the zero frequency and optionally
/// every ordinate folding onto `skip`. Returns `None` when no weight remains.
fn smooth_at(i: &Periodogram, weights: &[f64], j: i64, skip: Option<i64>) -> Option<f64> {
    let n = i.n() as i64;
    let kmax = weights.len() as i64 - 1;
    let mut num = 0.0;
    let mut den = 0.0;
    for k in -kmax..=kmax {
        let w = weights[k.unsigned_abs() as usize];
        if w == 0.0 {
            continue;
        }
        let idx = folded(j + k, n);
        if idx == 0 || Some(idx) == skip {
            continue;
        }
        num += w * i.at(idx);
        den += w;
    }
    (den > 0.0).then(|| num / den)
}

fn check_bandwidth(h_bw: f64, n: usize) -> Result<()> {
    let lo = 2.0 * PI / n as f64;
    if !(h_bw >= lo * (1.0 - 1e-12) && h_bw <= PI * (1.0 + 1e-12)) {
        return Err(invalid!("bandwidth {h_bw} outside [{lo}, pi]"));
    }
    Ok(())
}

/// Kernel estimate with window half-width `h_bw` radians.
pub fn kernel_spectral_estimate(i: &Periodogram, h_bw: f64) -> Result<SpectralDensityEstimate> {
    let n = i.n();
    check_bandwidth(h_bw, n)?;
    let weights = kernel_weights(h_bw, n);
    let values = (1..=i.grid().half() as i64)
        .map(|j| smooth_at(i, &weights, j, None).unwrap_or(0.0))
        .collect();
    SpectralDensityEstimate::from_values(i.grid(), h_bw, values)
}

/// Whittle-form leave-out cross-validation score.
pub fn cv_score(i: &Periodogram, h_bw: f64) -> Result<f64> {
    check_bandwidth(h_bw, i.n())?;
    let weights = kernel_weights(h_bw, i.n());
    let mut total = 0.0;
    for j in 1..=i.grid().half() as i64 {
        match smooth_at(i, &weights, j, Some(j)) {
            Some(f) if f > 0.0 => total += f.ln() + i.at(j) / f,
            _ => return Ok(f64::INFINITY),
        }
    }
    Ok(total)
}

/// Bandwidth from `grid` minimising [`cv_score`]; ties go to the smaller bandwidth.
pub fn cv_bandwidth(i: &Periodogram, grid: &[f64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(invalid!("bandwidth grid is empty"));
    }
    if grid.len() == 1 {
        check_bandwidth(grid[0], i.n())?;
        return Ok(grid[0]);
    }
    let mut best = (f64::INFINITY, f64::INFINITY);
    for &h in grid {
        let score = cv_score(i, h)?;
        if score < best.0 || (score == best.0 && h < best.1) {
            best = (score, h);
        }
    }
    if best.1.is_finite() {
        Ok(best.1)
    } else {
        Ok(grid.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }
}

/// Geometric grid of 15 bandwidths from `4 pi / n` to `pi / 2`.
pub fn default_bandwidth_grid(n: usize) -> Vec<f64> {
    let lo = (4.0 * PI / n as f64).min(PI / 2.0);
    let hi = PI / 2.0;
    let steps = 15;
    (0..steps)
        .map(|k| lo * (hi / lo).powf(k as f64 / (steps - 1) as f64))
        .collect()
}

/// Kernel estimate at the cross-validated bandwidth from the default grid.
pub fn cv_spectral_estimate(i: &Periodogram) -> Result<SpectralDensityEstimate> {
    let h = cv_bandwidth(i, &default_bandwidth_grid(i.n()))?;
    kernel_spectral_estimate(i, h)
}

/// Average over all windows of the length-`b` window periodograms.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsampleMeanSpectrum {
    b: usize,
    values: Vec<f64>,
}

impl SubsampleMeanSpectrum {
    pub fn from_windows(sub: &SubsamplePeriodograms) -> Self {
        let h = sub.half();
        let mut values = alloc::vec![0.0; h];
        for t in 0..sub.windows() {
            for (acc, v) in values.iter_mut().zip(sub.window(t)) {
                *acc += v;
            }
        }
        let m = sub.windows() as f64;
        for v in values.iter_mut() {
            *v /= m;
        }
        SubsampleMeanSpectrum { b: sub.b(), values }
    }

    pub fn b(&self) -> usize {
        self.b
    }

    /// Values at `lambda_{j,b}`, `j = 1..=b/2`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values with the relative positivity floor applied (used as divisors).
    pub fn floored(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        apply_floor(&mut v);
        if v.iter().all(|&x| x <= 0.0) {
            v.iter_mut().for_each(|x| *x = f64::MIN_POSITIVE);
        }
        v
    }
}

pub fn subsample_mean_spectrum(series: &TimeSeries, b: usize) -> Result<SubsampleMeanSpectrum> {
    let sub = crate::spectral::subsample_periodograms(series, b, None)?;
    Ok(SubsampleMeanSpectrum::from_windows(&sub))
}

pub fn subsample_mean_spectrum_tapered(
    series: &TimeSeries,
    b: usize,
    taper: TaperSpec,
) -> Result<SubsampleMeanSpectrum> {
    let sub = crate::spectral::subsample_periodograms(series, b, Some(taper))?;
    Ok(SubsampleMeanSpectrum::from_windows(&sub))
}
