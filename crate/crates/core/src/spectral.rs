//! Fourier grids, finite Fourier transforms and periodograms.
//!
//! Conventions: `J(lambda) = sum_{t=1}^n x_t exp(-i lambda t)` and
//! `I(lambda_j) = |J(lambda_j)|^2 / (2 pi n)`. Periodograms are stored once
//! for `j = 1..=N` with `N = floor(n/2)`; the ordinate at `-j` equals that at
//! `j` and the ordinate at `j = 0` is never used.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::fft::FftPlan;

/// Observed real-valued series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    centered: bool,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 4 {
            return Err(invalid!("series needs at least 4 values, got {}", values.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid!("non-finite value at position {i}"));
        }
        Ok(TimeSeries { values, centered: false })
    }

    /// Copy with the sample mean removed.
    pub fn centered(&self) -> TimeSeries {
        if self.centered {
            return self.clone();
        }
        let m = self.mean();
        TimeSeries {
            values: self.values.iter().map(|v| v - m).collect(),
            centered: true,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Fourier frequencies `2 pi j / n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FourierGrid {
    n: usize,
}

impl FourierGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(invalid!("Fourier grid needs n >= 4, got {n}"));
        }
        Ok(FourierGrid { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `N = floor(n/2)`, the number of positive frequencies.
    pub fn half(&self) -> usize {
        self.n / 2
    }

    pub fn frequency(&self, j: i64) -> f64 {
        2.0 * PI * j as f64 / self.n as f64
    }

    /// Frequencies `lambda_1, ..., lambda_N`.
    pub fn positive_frequencies(&self) -> Vec<f64> {
        (1..=self.half()).map(|j| self.frequency(j as i64)).collect()
    }

    /// Index range of `F_n = {-floor((n-1)/2), ..., floor(n/2)}`.
    pub fn f_indices(&self) -> core::ops::RangeInclusive<i64> {
        -(((self.n - 1) / 2) as i64)..=(self.n / 2) as i64
    }

    /// Index set `G(n) = {-N..-1, 1..N}`.
    pub fn g_indices(&self) -> impl Iterator<Item = i64> {
        let big_n = self.half() as i64;
        (-big_n..=-1).chain(1..=big_n)
    }
}

pub fn fourier_grid(n: usize) -> Result<FourierGrid> {
    FourierGrid::new(n)
}

/// Finite Fourier transform `J(lambda_j)` for `j = 0..n-1`.
#[derive(Debug, Clone)]
pub struct Dft {
    coeffs: Vec<Complex64>,
}

impl Dft {
    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    /// `J(lambda_j)` for any integer `j` (periodic in `n`).
    pub fn at(&self, j: i64) -> Complex64 {
        let n = self.coeffs.len() as i64;
        self.coeffs[j.rem_euclid(n) as usize]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
}

/// `sum_{t=1}^n x_t exp(-i lambda_j t)` for all `j = 0..n-1`.
pub fn dft_values(x: &[f64], plan: &FftPlan) -> Vec<Complex64> {
    let n = x.len();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan.forward(&mut buf);
    // the transform indexes time from 0; shift to t = 1..n
    for (j, z) in buf.iter_mut().enumerate().take(n / 2 + 1) {
        let ang = -2.0 * PI * j as f64 / n as f64;
        *z *= Complex64::new(ang.cos(), ang.sin());
    }
    // real input: enforce exact conjugate symmetry
    buf[0].im = 0.0;
    if n % 2 == 0 {
        buf[n / 2].im = 0.0;
    }
    for j in n / 2 + 1..n {
        buf[j] = buf[n - j].conj();
    }
    buf
}

/// Finite Fourier transform of the series as given (no centering).
pub fn dft(series: &TimeSeries) -> Dft {
    let plan = FftPlan::new(series.len());
    Dft { coeffs: dft_values(series.values(), &plan) }
}

/// Ordinates at `j = 1..=N` of a (possibly tapered) periodogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    grid: FourierGrid,
    ordinates: Vec<f64>,
}

impl Periodogram {
    pub fn from_ordinates(grid: FourierGrid, ordinates: Vec<f64>) -> Result<Self> {
        if ordinates.len() != grid.half() {
            return Err(invalid!(
                "expected {} ordinates for n = {}, got {}",
                grid.half(),
                grid.n(),
                ordinates.len()
            ));
        }
        if ordinates.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid!("periodogram ordinates must be finite and non-negative"));
        }
        Ok(Periodogram { grid, ordinates })
    }

    pub fn grid(&self) -> FourierGrid {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    /// Ordinates at `j = 1..=N`.
    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    /// Ordinate at any integer index; zero at multiples of `n`.
    pub fn at(&self, j: i64) -> f64 {
        let n = self.grid.n() as i64;
        let r = j.rem_euclid(n);
        let k = r.min(n - r);
        if k == 0 {
            0.0
        } else {
            self.ordinates[(k - 1) as usize]
        }
    }

    pub fn into_ordinates(self) -> Vec<f64> {
        self.ordinates
    }
}

fn half_ordinates(coeffs: &[Complex64], norm: f64) -> Vec<f64> {
    let big_n = coeffs.len() / 2;
    (1..=big_n).map(|j| coeffs[j].norm_sqr() / norm).collect()
}

/// Periodogram of the mean-corrected series.
pub fn periodogram(series: &TimeSeries) -> Periodogram {
    let x = series.centered();
    let n = x.len();
    let plan = FftPlan::new(n);
    let coeffs = dft_values(x.values(), &plan);
    Periodogram {
        grid: FourierGrid { n },
        ordinates: half_ordinates(&coeffs, 2.0 * PI * n as f64),
    }
}

/// Data taper family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TaperSpec {
    Rectangular,
    /// Split-cosine (Tukey) taper tapering a proportion `rho` of the data.
    Tukey(f64),
}

impl TaperSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TaperSpec::Rectangular => Ok(()),
            TaperSpec::Tukey(rho) if (0.0..=1.0).contains(&rho) => Ok(()),
            TaperSpec::Tukey(rho) => Err(invalid!("taper proportion must lie in [0, 1], got {rho}")),
        }
    }

    pub fn is_rectangular(&self) -> bool {
        matches!(*self, TaperSpec::Rectangular | TaperSpec::Tukey(0.0))
    }

    /// Taper function `h(x)` on `(0, 1]`.
    pub fn h(&self, x: f64) -> f64 {
        match *self {
            TaperSpec::Rectangular => 1.0,
            TaperSpec::Tukey(rho) => {
                if rho <= 0.0 {
                    1.0
                } else if x < rho / 2.0 {
                    0.5 * (1.0 - (2.0 * PI * x / rho).cos())
                } else if x > 1.0 - rho / 2.0 {
                    0.5 * (1.0 - (2.0 * PI * (1.0 - x) / rho).cos())
                } else {
                    1.0
                }
            }
        }
    }
}

/// Taper weights `h_{t,n} = h(t/n)` and their power sums.
#[derive(Debug, Clone, PartialEq)]
pub struct Taper {
    spec: TaperSpec,
    weights: Vec<f64>,
    h1: f64,
    h2: f64,
    h4: f64,
}

impl Taper {
    pub fn spec(&self) -> TaperSpec {
        self.spec
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `H_{k,n} = sum_t h_{t,n}^k` for `k` in {1, 2, 4}.
    pub fn power_sum(&self, k: u32) -> f64 {
        match k {
            1 => self.h1,
            2 => self.h2,
            4 => self.h4,
            _ => self.weights.iter().map(|h| h.powi(k as i32)).sum(),
        }
    }

    /// Variance inflation `n H_4 / H_2^2` of tapered periodogram ordinates.
    pub fn variance_factor(&self) -> f64 {
        self.weights.len() as f64 * self.h4 / (self.h2 * self.h2)
    }
}

pub fn taper_weights(spec: TaperSpec, n: usize) -> Result<Taper> {
    spec.validate()?;
    if n == 0 {
        return Err(invalid!("taper length must be positive"));
    }
    let weights: Vec<f64> = if spec.is_rectangular() {
        vec![1.0; n]
    } else {
        (1..=n).map(|t| spec.h(t as f64 / n as f64)).collect()
    };
    let h1 = weights.iter().sum();
    let h2 = weights.iter().map(|h| h * h).sum::<f64>();
    let h4 = weights.iter().map(|h| (h * h) * (h * h)).sum();
    if h2 <= 0.0 {
        return Err(invalid!("taper has zero energy for n = {n}"));
    }
    Ok(Taper { spec, weights, h1, h2, h4 })
}

/// `|sum_t h_t x_t exp(-i lambda_j t)|^2 / (2 pi H_2)` on the mean-corrected series.
pub fn tapered_periodogram(series: &TimeSeries, taper: &Taper) -> Result<Periodogram> {
    if taper.len() != series.len() {
        return Err(invalid!(
            "taper length {} does not match series length {}",
            taper.len(),
            series.len()
        ));
    }
    if taper.spec.is_rectangular() {
        return Ok(periodogram(series));
    }
    let x = series.centered();
    Ok(tapered_periodogram_raw(x.values(), taper, &FftPlan::new(x.len())))
}

pub(crate) fn tapered_periodogram_raw(x: &[f64], taper: &Taper, plan: &FftPlan) -> Periodogram {
    let n = x.len();
    let xt: Vec<f64> = x.iter().zip(taper.weights()).map(|(v, h)| v * h).collect();
    let coeffs = dft_values(&xt, plan);
    Periodogram {
        grid: FourierGrid { n },
        ordinates: half_ordinates(&coeffs, 2.0 * PI * taper.power_sum(2)),
    }
}

/// Periodograms of all length-`b` windows `x_t..x_{t+b-1}`, `t = 1..n-b+1`.
///
/// Windows are taken from the series centred at the full-sample mean.
#[derive(Debug, Clone)]
pub struct SubsamplePeriodograms {
    n: usize,
    b: usize,
    // row-major: window t (0-based) holds ordinates j = 1..=b/2
    ordinates: Vec<f64>,
}

impl SubsamplePeriodograms {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn grid(&self) -> FourierGrid {
        FourierGrid { n: self.b }
    }

    pub fn windows(&self) -> usize {
        self.n - self.b + 1
    }

    pub fn half(&self) -> usize {
        self.b / 2
    }

    /// Ordinates `j = 1..=b/2` of window `t` (0-based).
    pub fn window(&self, t: usize) -> &[f64] {
        let h = self.half();
        &self.ordinates[t * h..(t + 1) * h]
    }

    pub fn periodogram(&self, t: usize) -> Periodogram {
        Periodogram { grid: self.grid(), ordinates: self.window(t).to_vec() }
    }
}

pub fn subsample_periodograms(
    series: &TimeSeries,
    b: usize,
    taper: Option<TaperSpec>,
) -> Result<SubsamplePeriodograms> {
    let n = series.len();
    if b < 4 || b > n {
        return Err(invalid!("subsample length must lie in [4, {n}], got {b}"));
    }
    let taper = match taper {
        Some(spec) if !spec.is_rectangular() => Some(taper_weights(spec, b)?),
        Some(spec) => {
            spec.validate()?;
            None
        }
        None => None,
    };
    let x = series.centered();
    let plan = FftPlan::new(b);
    let windows = n - b + 1;
    let mut ordinates = Vec::with_capacity(windows * (b / 2));
    for t in 0..windows {
        let slice = &x.values()[t..t + b];
        let p = match &taper {
            Some(tp) => tapered_periodogram_raw(slice, tp, &plan),
            None => {
                let coeffs = dft_values(slice, &plan);
                Periodogram {
                    grid: FourierGrid { n: b },
                    ordinates: half_ordinates(&coeffs, 2.0 * PI * b as f64),
                }
            }
        };
        ordinates.extend_from_slice(&p.ordinates);
    }
    Ok(SubsamplePeriodograms { n, b, ordinates })
}
