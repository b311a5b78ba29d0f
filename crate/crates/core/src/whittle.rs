//! Whittle objectives, their derivatives and minimisers.
//!
//! All objectives are `D_n(theta, s) = (1/n) sum_{j in G(n)} {log f_j + s_j / f_j}`,
//! evaluated as `(2/n) sum_{j=1}^N` since every term is even in `j`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::family::SpectralFamily;
use crate::fft::FftPlan;
use crate::linalg::Matrix;
use crate::optimize::{self, Problem};
use crate::spectral::{FourierGrid, Periodogram};

/// Which parametric spectrum enters the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// `f_theta` itself.
    Standard,
    /// The Fejer-smoothed expectation `f_bar_theta` of the periodogram.
    Debiased,
    /// `f_theta` with `log f_theta` replaced by its frequency average
    /// `log(sigma^2 / 2 pi)`; for AR families its minimiser is closed form.
    Innovation,
}

/// Fejer kernel `sin^2(n x / 2) / (2 pi n sin^2(x / 2))`, `n / 2 pi` where `sin(x/2) = 0`.
pub fn fejer_kernel(n: usize, x: f64) -> f64 {
    let n_f = n as f64;
    // the kernel is 2 pi periodic; reduce to [-pi, pi]
    let x = x - 2.0 * PI * (x / (2.0 * PI)).round();
    if x.abs() < 1e-12 {
        return n_f / (2.0 * PI);
    }
    let s = (0.5 * x).sin();
    let num = (0.5 * n_f * x).sin();
    num * num / (2.0 * PI * n_f * s * s)
}

/// Fejer smoothing of spectra through the autocovariance identity
/// `f_bar(lambda) = (2 pi)^{-1} sum_{|h|<n} (1 - |h|/n) gamma(h) e^{-i h lambda}`,
/// with `gamma` obtained by FFT quadrature on `M >= 8 n` points.
#[derive(Debug, Clone)]
pub struct FejerSmoother {
    n: usize,
    fine: FftPlan,
    coarse: FftPlan,
}

impl FejerSmoother {
    pub fn new(n: usize) -> Self {
        let m = (8 * n).next_power_of_two();
        FejerSmoother { n, fine: FftPlan::new(m), coarse: FftPlan::new(n) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of quadrature nodes.
    pub fn nodes(&self) -> usize {
        self.fine.len()
    }

    /// `gamma(0..n)` of an even function sampled at `2 pi k / M`, `k = 0..=M/2`.
    pub fn autocovariances(&self, half_samples: &[f64]) -> Vec<f64> {
        let m = self.fine.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for k in 0..m {
            let idx = if k <= m / 2 { k } else { m - k };
            buf[k] = Complex64::new(half_samples[idx], 0.0);
        }
        self.fine.forward(&mut buf);
        let w = 2.0 * PI / m as f64;
        buf[..self.n].iter().map(|z| z.re * w).collect()
    }

    /// `f_bar(lambda_j)` for `j = 1..=n/2`.
    pub fn smooth_on_grid(&self, gamma: &[f64]) -> Vec<f64> {
        let n = self.n;
        let nf = n as f64;
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        d[0].re = gamma[0];
        for r in 1..n {
            d[r].re = (1.0 - r as f64 / nf) * gamma[r] + (r as f64 / nf) * gamma[n - r];
        }
        self.coarse.forward(&mut d);
        d[1..=n / 2].iter().map(|z| z.re / (2.0 * PI)).collect()
    }

    /// `f_bar(lambda)` at an arbitrary frequency.
    pub fn smooth_at(&self, gamma: &[f64], lambda: f64) -> f64 {
        let nf = self.n as f64;
        let mut s = gamma[0];
        for (h, g) in gamma.iter().enumerate().skip(1) {
            s += 2.0 * (1.0 - h as f64 / nf) * g * (h as f64 * lambda).cos();
        }
        s / (2.0 * PI)
    }

    pub fn fine_frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        let m = self.fine.len();
        (0..=m / 2).map(move |k| 2.0 * PI * k as f64 / m as f64)
    }
}

/// Per-frequency model quantities at `lambda_1..lambda_N`: the spectrum and
/// the derivatives of its reciprocal.
#[derive(Debug, Clone)]
pub struct GridModel {
    m: usize,
    pub f: Vec<f64>,
    /// Row `j` holds the gradient of `1/f` at `lambda_{j+1}`.
    pub du: Vec<f64>,
    /// Row `j` holds the Hessian (row-major) of `1/f`; empty when not requested.
    pub d2u: Vec<f64>,
}

impl GridModel {
    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn du_at(&self, j: usize) -> &[f64] {
        &self.du[j * self.m..(j + 1) * self.m]
    }

    pub fn d2u_at(&self, j: usize) -> &[f64] {
        let mm = self.m * self.m;
        &self.d2u[j * mm..(j + 1) * mm]
    }

    /// Scores `g = -(2 pi)^{-1} d(1/f)` at grid point `j` (0-based).
    pub fn score_at(&self, j: usize) -> Vec<f64> {
        self.du_at(j).iter().map(|d| -d / (2.0 * PI)).collect()
    }
}

fn plain_model(family: &dyn SpectralFamily, theta: &[f64], lambdas: &[f64], hessian: bool) -> GridModel {
    let m = family.dim();
    let mut f = Vec::with_capacity(lambdas.len());
    let mut du = vec![0.0; lambdas.len() * m];
    let mut d2u = if hessian { vec![0.0; lambdas.len() * m * m] } else { Vec::new() };
    for (j, &l) in lambdas.iter().enumerate() {
        let h = if hessian { Some(&mut d2u[j * m * m..(j + 1) * m * m]) } else { None };
        f.push(family.inverse_derivatives(theta, l, &mut du[j * m..(j + 1) * m], h));
    }
    GridModel { m, f, du, d2u }
}

/// Smoothed spectrum and its first (and optionally second) derivatives,
/// as autocovariance sequences ready for [`FejerSmoother`].
struct SmoothedDerivatives {
    f: Vec<f64>,
    df: Vec<Vec<f64>>,
    d2f: Vec<Vec<f64>>,
}

fn fejer_autocovariances(
    family: &dyn SpectralFamily,
    theta: &[f64],
    smoother: &FejerSmoother,
    hessian: bool,
) -> SmoothedDerivatives {
    let m = family.dim();
    let nodes: Vec<f64> = smoother.fine_frequencies().collect();
    let k = nodes.len();
    let mut f = vec![0.0; k];
    let mut df = vec![vec![0.0; k]; m];
    let pairs = m * (m + 1) / 2;
    let mut d2f = if hessian { vec![vec![0.0; k]; pairs] } else { Vec::new() };
    let mut du = vec![0.0; m];
    let mut d2u = vec![0.0; m * m];
    for (i, &l) in nodes.iter().enumerate() {
        let fv = family.inverse_derivatives(theta, l, &mut du, if hessian { Some(&mut d2u) } else { None });
        f[i] = fv;
        let f2 = fv * fv;
        for r in 0..m {
            df[r][i] = -f2 * du[r];
        }
        if hessian {
            let f3 = f2 * fv;
            let mut p = 0;
            for r in 0..m {
                for c in r..m {
                    d2f[p][i] = 2.0 * f3 * du[r] * du[c] - f2 * d2u[r * m + c];
                    p += 1;
                }
            }
        }
    }
    SmoothedDerivatives {
        f: smoother.autocovariances(&f),
        df: df.iter().map(|v| smoother.autocovariances(v)).collect(),
        d2f: d2f.iter().map(|v| smoother.autocovariances(v)).collect(),
    }
}

fn debiased_model(family: &dyn SpectralFamily, theta: &[f64], smoother: &FejerSmoother, hessian: bool) -> GridModel {
    let m = family.dim();
    let ac = fejer_autocovariances(family, theta, smoother, hessian);
    let fbar = smoother.smooth_on_grid(&ac.f);
    let dfbar: Vec<Vec<f64>> = ac.df.iter().map(|g| smoother.smooth_on_grid(g)).collect();
    let d2fbar: Vec<Vec<f64>> = ac.d2f.iter().map(|g| smoother.smooth_on_grid(g)).collect();
    let len = fbar.len();
    let mut du = vec![0.0; len * m];
    let mut d2u = if hessian { vec![0.0; len * m * m] } else { Vec::new() };
    for j in 0..len {
        let fb = fbar[j];
        let fb2 = fb * fb;
        for r in 0..m {
            du[j * m + r] = -dfbar[r][j] / fb2;
        }
        if hessian {
            let fb3 = fb2 * fb;
            let mut p = 0;
            for r in 0..m {
                for c in r..m {
                    let v = 2.0 * dfbar[r][j] * dfbar[c][j] / fb3 - d2fbar[p][j] / fb2;
                    d2u[j * m * m + r * m + c] = v;
                    d2u[j * m * m + c * m + r] = v;
                    p += 1;
                }
            }
        }
    }
    GridModel { m, f: fbar, du, d2u }
}

/// Objective type together with any precomputed machinery for sample size `n`.
#[derive(Debug, Clone)]
pub struct Likelihood {
    kind: Objective,
    grid: FourierGrid,
    lambdas: Vec<f64>,
    fejer: Option<FejerSmoother>,
}

impl Likelihood {
    pub fn new(kind: Objective, n: usize) -> Result<Self> {
        let grid = FourierGrid::new(n)?;
        let fejer = (kind == Objective::Debiased).then(|| FejerSmoother::new(n));
        Ok(Likelihood { kind, grid, lambdas: grid.positive_frequencies(), fejer })
    }

    pub fn kind(&self) -> Objective {
        self.kind
    }

    pub fn grid(&self) -> FourierGrid {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    /// Model spectrum (plain or Fejer-smoothed) and reciprocal derivatives on the grid.
    pub fn model(&self, family: &dyn SpectralFamily, theta: &[f64], hessian: bool) -> GridModel {
        match (&self.fejer, family.is_constant_in_frequency()) {
            (Some(s), false) => debiased_model(family, theta, s, hessian),
            _ => plain_model(family, theta, &self.lambdas, hessian),
        }
    }

    fn check(&self, family: &dyn SpectralFamily, theta: &[f64], spec: &[f64]) -> Result<()> {
        if spec.len() != self.grid.half() {
            return Err(invalid!("expected {} spectral values, got {}", self.grid.half(), spec.len()));
        }
        if theta.len() != family.dim() {
            return Err(invalid!("parameter has length {}, family needs {}", theta.len(), family.dim()));
        }
        if !family.contains(theta) {
            return Err(Error::Domain(format!("{theta:?}")));
        }
        if self.kind == Objective::Innovation && family.innovation_index().is_none() {
            return Err(invalid!("innovation objective needs a family with an innovation variance"));
        }
        Ok(())
    }

    /// Objective value; `+inf` outside the parameter space.
    pub fn value(&self, family: &dyn SpectralFamily, theta: &[f64], spec: &[f64]) -> f64 {
        if self.check(family, theta, spec).is_err() {
            return f64::INFINITY;
        }
        let model = self.model(family, theta, false);
        let log_term = match self.kind {
            Objective::Innovation => {
                let s2 = theta[family.innovation_index().unwrap_or(0)];
                Some((s2 / (2.0 * PI)).ln())
            }
            _ => None,
        };
        let mut total = 0.0;
        for (f, s) in model.f.iter().zip(spec) {
            total += log_term.unwrap_or_else(|| f.ln()) + s / f;
        }
        let v = 2.0 * total / self.n() as f64;
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    }

    pub fn score(&self, family: &dyn SpectralFamily, theta: &[f64], spec: &[f64]) -> Result<Vec<f64>> {
        self.check(family, theta, spec)?;
        let m = family.dim();
        let model = self.model(family, theta, false);
        let mut g = vec![0.0; m];
        let innovation = self.kind == Objective::Innovation;
        for (j, (&f, &s)) in model.f.iter().zip(spec).enumerate() {
            let du = model.du_at(j);
            let w = if innovation { s } else { s - f };
            for r in 0..m {
                g[r] += w * du[r];
            }
        }
        if innovation {
            let k = family.innovation_index().unwrap_or(0);
            g[k] += model.len() as f64 / theta[k];
        }
        let c = 2.0 / self.n() as f64;
        Ok(g.into_iter().map(|v| v * c).collect())
    }

    pub fn hessian(&self, family: &dyn SpectralFamily, theta: &[f64], spec: &[f64]) -> Result<Matrix> {
        self.check(family, theta, spec)?;
        let m = family.dim();
        let model = self.model(family, theta, true);
        let mut h = Matrix::zeros(m, m);
        let innovation = self.kind == Objective::Innovation;
        for (j, (&f, &s)) in model.f.iter().zip(spec).enumerate() {
            let du = model.du_at(j);
            let d2u = model.d2u_at(j);
            let w = if innovation { s } else { s - f };
            let f2 = if innovation { 0.0 } else { f * f };
            for r in 0..m {
                for c in 0..m {
                    h[(r, c)] += w * d2u[r * m + c] + f2 * du[r] * du[c];
                }
            }
        }
        if innovation {
            let k = family.innovation_index().unwrap_or(0);
            h[(k, k)] -= model.len() as f64 / (theta[k] * theta[k]);
        }
        let c = 2.0 / self.n() as f64;
        Ok(crate::linalg::symmetrize(&(h * c)))
    }

    /// Autocovariances implied by `spec`: `(2 pi / n) sum_{G(n)} s_j cos(h lambda_j)`.
    pub fn implied_autocovariances(&self, spec: &[f64], max_lag: usize) -> Vec<f64> {
        let c = 4.0 * PI / self.n() as f64;
        (0..=max_lag)
            .map(|h| c * spec.iter().zip(&self.lambdas).map(|(s, l)| s * (h as f64 * l).cos()).sum::<f64>())
            .collect()
    }

    /// Default start list: Yule-Walker-implied parameter and box centre.
    pub fn default_starts(&self, family: &dyn SpectralFamily, spec: &[f64]) -> Vec<Vec<f64>> {
        let gamma = self.implied_autocovariances(spec, family.dim());
        let mut starts = Vec::new();
        if let Some(t) = family.from_autocovariances(&gamma) {
            starts.push(t);
        }
        starts.push(family.box_center(gamma[0]));
        starts
    }

    /// Closed-form minimiser of the innovation objective, if the family admits one.
    fn innovation_closed_form(&self, family: &dyn SpectralFamily, spec: &[f64]) -> Option<Vec<f64>> {
        family.innovation_index()?;
        let big_n = self.grid.half() as f64;
        let c = 2.0 * PI / big_n;
        let gamma: Vec<f64> = (0..family.dim())
            .map(|h| c * spec.iter().zip(&self.lambdas).map(|(s, l)| s * (h as f64 * l).cos()).sum::<f64>())
            .collect();
        family.from_autocovariances(&gamma)
    }

    /// Minimises the objective from each start in turn (plus the default starts)
    /// and keeps the best converged result.
    pub fn minimize(&self, family: &dyn SpectralFamily, spec: &[f64], starts: &[Vec<f64>]) -> Result<ParamEstimate> {
        if spec.len() != self.grid.half() {
            return Err(invalid!("expected {} spectral values, got {}", self.grid.half(), spec.len()));
        }
        if self.kind == Objective::Innovation {
            if let Some(theta) = self.innovation_closed_form(family, spec) {
                return Ok(self.finish(family, spec, theta, 0));
            }
        }
        let mut best: Option<ParamEstimate> = None;
        for start in starts {
            if !family.contains(start) {
                continue;
            }
            let est = self.minimize_from(family, spec, start);
            let better = match &best {
                None => true,
                Some(b) => (est.converged && !b.converged) || (est.converged == b.converged && est.objective < b.objective),
            };
            if better {
                best = Some(est);
            }
        }
        best.ok_or_else(|| Error::Domain(String::from("no admissible starting value")))
    }

    /// Single-start minimisation (no multi-start).
    pub fn minimize_from(&self, family: &dyn SpectralFamily, spec: &[f64], start: &[f64]) -> ParamEstimate {
        let problem = WhittleProblem { lik: self, family, spec };
        let mut out = optimize::newton(&problem, start, 100);
        let tol = 1e-6 * (1.0 + norm(&out.x));
        if !(out.gradient_norm <= tol) {
            let nm = optimize::nelder_mead(&problem, &out.x, 4000);
            let polished = optimize::newton(&problem, &nm.x, 100);
            let it = out.iterations + nm.iterations + polished.iterations;
            if polished.value <= out.value || polished.gradient_norm < out.gradient_norm {
                out = polished;
            }
            out.iterations = it;
        }
        self.finish(family, spec, out.x, out.iterations)
    }

    fn finish(&self, family: &dyn SpectralFamily, spec: &[f64], theta: Vec<f64>, iterations: usize) -> ParamEstimate {
        let objective = self.value(family, &theta, spec);
        let score_norm = self.score(family, &theta, spec).map(|g| norm(&g)).unwrap_or(f64::INFINITY);
        let converged = objective.is_finite() && score_norm <= 1e-6 * (1.0 + norm(&theta)) && family.contains(&theta);
        ParamEstimate { theta, objective, converged, iterations, score_norm }
    }
}

use alloc::string::String;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

struct WhittleProblem<'a> {
    lik: &'a Likelihood,
    family: &'a dyn SpectralFamily,
    spec: &'a [f64],
}

impl Problem for WhittleProblem<'_> {
    fn dim(&self) -> usize {
        self.family.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.lik.value(self.family, x, self.spec)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.lik
            .score(self.family, x, self.spec)
            .unwrap_or_else(|_| vec![f64::NAN; self.family.dim()])
    }

    fn hessian(&self, x: &[f64]) -> Matrix {
        let m = self.family.dim();
        self.lik
            .hessian(self.family, x, self.spec)
            .unwrap_or_else(|_| Matrix::from_element(m, m, f64::NAN))
    }
}

/// Result of a Whittle minimisation.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamEstimate {
    pub theta: Vec<f64>,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    pub score_norm: f64,
}

/// `D_n(theta, spec)` with the plain parametric spectrum.
pub fn whittle_objective(theta: &[f64], grid: FourierGrid, spec: &[f64], family: &dyn SpectralFamily) -> Result<f64> {
    let lik = Likelihood::new(Objective::Standard, grid.n())?;
    lik.check(family, theta, spec)?;
    Ok(lik.value(family, theta, spec))
}

pub fn whittle_score(theta: &[f64], grid: FourierGrid, spec: &[f64], family: &dyn SpectralFamily) -> Result<Vec<f64>> {
    Likelihood::new(Objective::Standard, grid.n())?.score(family, theta, spec)
}

pub fn whittle_hessian(theta: &[f64], grid: FourierGrid, spec: &[f64], family: &dyn SpectralFamily) -> Result<Matrix> {
    Likelihood::new(Objective::Standard, grid.n())?.hessian(family, theta, spec)
}

/// `D_n^{(db)}(theta, spec)`.
pub fn debiased_objective(theta: &[f64], grid: FourierGrid, spec: &[f64], family: &dyn SpectralFamily) -> Result<f64> {
    let lik = Likelihood::new(Objective::Debiased, grid.n())?;
    lik.check(family, theta, spec)?;
    Ok(lik.value(family, theta, spec))
}

/// `f_bar_theta(lambda_j)` for `j = 1..=N`.
pub fn debiased_expected_spectrum(family: &dyn SpectralFamily, theta: &[f64], grid: FourierGrid) -> Result<Vec<f64>> {
    if !family.contains(theta) {
        return Err(Error::Domain(format!("{theta:?}")));
    }
    let lik = Likelihood::new(Objective::Debiased, grid.n())?;
    Ok(lik.model(family, theta, false).f)
}

/// Debiased scores `-(2 pi)^{-1} d(1/f_bar_theta)` at arbitrary frequencies,
/// with `f_bar` computed for sample size `n`.
pub fn debiased_scores_at(family: &dyn SpectralFamily, theta: &[f64], n: usize, lambdas: &[f64]) -> Vec<Vec<f64>> {
    if family.is_constant_in_frequency() {
        return lambdas.iter().map(|&l| family.score_vector(theta, l)).collect();
    }
    let smoother = FejerSmoother::new(n);
    let ac = fejer_autocovariances(family, theta, &smoother, false);
    lambdas
        .iter()
        .map(|&l| {
            let fb = smoother.smooth_at(&ac.f, l);
            ac.df
                .iter()
                .map(|g| smoother.smooth_at(g, l) / (fb * fb) / (2.0 * PI))
                .collect()
        })
        .collect()
}

/// Minimiser of the plain Whittle objective, with multi-start
/// (`theta_init`, Yule-Walker-implied, box centre).
pub fn minimize_whittle(family: &dyn SpectralFamily, grid: FourierGrid, spec: &[f64], theta_init: &[f64]) -> Result<ParamEstimate> {
    let lik = Likelihood::new(Objective::Standard, grid.n())?;
    fit(&lik, family, spec, Some(theta_init))
}

/// Minimises `lik` starting from `theta_init` (if given) and the default starts.
pub fn fit(lik: &Likelihood, family: &dyn SpectralFamily, spec: &[f64], theta_init: Option<&[f64]>) -> Result<ParamEstimate> {
    let mut starts: Vec<Vec<f64>> = theta_init.map(|t| vec![t.to_vec()]).unwrap_or_default();
    starts.extend(lik.default_starts(family, spec));
    lik.minimize(family, spec, &starts)
}

/// `theta_0 = argmin D_n(theta, f_hat)`.
pub fn pseudo_true_parameter(lik: &Likelihood, family: &dyn SpectralFamily, f_hat: &crate::smoothing::SpectralDensityEstimate) -> Result<ParamEstimate> {
    if f_hat.grid().n() != lik.n() {
        return Err(invalid!("spectral estimate is for n = {}, objective for n = {}", f_hat.grid().n(), lik.n()));
    }
    fit(lik, family, f_hat.values(), None)
}

/// `sum_{G(n)} I cos(lambda) / sum_{G(n)} I`.
pub fn ar1_closed_form(i: &Periodogram) -> Result<f64> {
    let lambdas = i.grid().positive_frequencies();
    let den: f64 = i.ordinates().iter().sum();
    if !(den > 0.0) {
        return Err(Error::Degenerate(String::from("periodogram is identically zero")));
    }
    let num: f64 = i.ordinates().iter().zip(&lambdas).map(|(v, l)| v * l.cos()).sum();
    Ok(num / den)
}
