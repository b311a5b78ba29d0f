//! Hybrid frequency-domain bootstrap for Whittle estimators: the
//! multiplicative periodogram bootstrap for the Gaussian part of the
//! covariance, convolved subsampling for the fourth-order cumulant part, and
//! the tapered, debiased and boundary-corrected variants.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::boundary::boundary_periodogram;
use crate::error::{invalid, Error, Result};
use crate::family::SpectralFamily;
use crate::fft::FftPlan;
use crate::linalg::{condition_number, invert, project_psd, psd_sqrt, standardizer, symmetrize, Matrix, Vector};
use crate::smoothing::{cv_spectral_estimate, SpectralDensityEstimate, SubsampleMeanSpectrum};
use crate::spectral::{
    dft_values, periodogram, subsample_periodograms, taper_weights, tapered_periodogram, FourierGrid, Periodogram,
    SubsamplePeriodograms, Taper, TaperSpec, TimeSeries,
};
use crate::whittle::{debiased_scores_at, fit, Likelihood, Objective, ParamEstimate};
use crate::yule_walker::yule_walker;

/// Likelihood variant being bootstrapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    Standard,
    Tapered(TaperSpec),
    Debiased,
    /// Boundary-corrected likelihood with a fixed AR order.
    Boundary(usize),
}

/// How the parameter is estimated from a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// Numerical minimiser of the discrete Whittle objective.
    Whittle,
    /// Exact minimiser of the objective with `log f_theta` replaced by its
    /// frequency average (closed form for AR families).
    Innovation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapConfig {
    pub replicates: usize,
    /// Subsample length; `None` selects [`default_block`].
    pub block: Option<usize>,
    pub seed: u64,
    pub variant: Variant,
    pub estimator: Estimator,
}

/// Rule-of-thumb subsample length `round(4 n^{1/4})`.
pub fn default_block(n: usize) -> usize {
    (4.0 * (n as f64).powf(0.25)).round() as usize
}

impl BootstrapConfig {
    pub fn new(replicates: usize, seed: u64) -> Self {
        BootstrapConfig { replicates, block: None, seed, variant: Variant::Standard, estimator: Estimator::Whittle }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_block(mut self, b: usize) -> Self {
        self.block = Some(b);
        self
    }

    pub fn with_estimator(mut self, estimator: Estimator) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn block_for(&self, n: usize) -> usize {
        self.block.unwrap_or_else(|| default_block(n))
    }

    pub fn objective(&self) -> Objective {
        match (self.variant, self.estimator) {
            (Variant::Debiased, _) => Objective::Debiased,
            (_, Estimator::Whittle) => Objective::Standard,
            (_, Estimator::Innovation) => Objective::Innovation,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.replicates < 100 {
            return Err(invalid!("need at least 100 bootstrap replicates, got {}", self.replicates));
        }
        let b = self.block_for(n);
        if b < 4 || b > n {
            return Err(invalid!("subsample length must lie in [4, {n}], got {b}"));
        }
        match self.variant {
            Variant::Debiased if self.estimator == Estimator::Innovation => {
                Err(invalid!("the debiased variant has no innovation-form estimator"))
            }
            Variant::Tapered(spec) => spec.validate(),
            Variant::Boundary(p) if 2 * p >= n => Err(invalid!("AR order {p} must be below n/2")),
            _ => Ok(()),
        }
    }
}

/// Per-replicate random stream: ChaCha8 seeded by `seed`, stream `index`.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `I*(lambda_j) = f_hat(lambda_j) U_j` with `U_j` i.i.d. standard exponential.
pub fn mult_pseudo_periodogram<R: Rng + ?Sized>(f_hat: &SpectralDensityEstimate, rng: &mut R) -> Periodogram {
    let ordinates = f_hat.values().iter().map(|f| f * rng.sample::<f64, _>(Exp1)).collect();
    Periodogram::from_ordinates(f_hat.grid(), ordinates).expect("positive spectral estimate")
}

/// Gaussian pseudo series together with the normalised transform `Z*` of its
/// driving noise (`Z_s` for `s = 0..n`, `|Z_s|^2` standard exponential off zero).
#[derive(Debug, Clone)]
pub struct PseudoSeries {
    pub series: TimeSeries,
    pub z: Vec<Complex64>,
}

/// `X*_t = sqrt(2 pi / n) sum_{s} f_hat^{1/2}(lambda_s) Z*_s e^{i t lambda_s}`
/// with `Z*_s = n^{-1/2} sum_t eps_t e^{-i t lambda_s}` and standard normal `eps`.
pub fn gaussian_pseudo_series<R: Rng + ?Sized>(f_hat: &SpectralDensityEstimate, rng: &mut R) -> Result<PseudoSeries> {
    let n = f_hat.grid().n();
    let plan = FftPlan::new(n);
    let sqrt_f: Vec<f64> = (0..n as i64).map(|s| f_hat.at_index(s).sqrt()).collect();
    pseudo_series_with(&sqrt_f, &plan, rng)
}

fn pseudo_series_with<R: Rng + ?Sized>(sqrt_f: &[f64], plan: &FftPlan, rng: &mut R) -> Result<PseudoSeries> {
    let n = sqrt_f.len();
    let eps: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let scale = 1.0 / (n as f64).sqrt();
    let z: Vec<Complex64> = dft_values(&eps, plan).into_iter().map(|c| c * scale).collect();
    let mut c: Vec<Complex64> = z.iter().zip(sqrt_f).map(|(z, s)| z * *s).collect();
    plan.inverse(&mut c);
    let k = (2.0 * PI / n as f64).sqrt();
    // X_t = k * c_hat[t mod n] for t = 1..n
    let mut values = Vec::with_capacity(n);
    let mut residue: f64 = 0.0;
    let mut size: f64 = 0.0;
    for t in 1..=n {
        let v = c[t % n];
        residue = residue.max(v.im.abs());
        size = size.max(v.re.abs());
        values.push(k * v.re);
    }
    if residue > 1e-10 * size.max(1.0) {
        return Err(Error::Numerical(format!("pseudo series has imaginary residue {residue:e}")));
    }
    Ok(PseudoSeries { series: TimeSeries::new(values)?, z })
}

/// Tapered periodogram of a pseudo series.
pub fn tapered_pseudo_periodogram(x: &TimeSeries, taper: &Taper) -> Result<Periodogram> {
    tapered_periodogram(x, taper)
}

/// Scores `g_theta(lambda_j) = -(2 pi)^{-1} d(1/f)` at `lambda_1..lambda_N`
/// for the objective's model spectrum.
pub fn grid_scores(lik: &Likelihood, family: &dyn SpectralFamily, theta: &[f64]) -> Vec<Vec<f64>> {
    let model = lik.model(family, theta, false);
    (0..model.len()).map(|j| model.score_at(j)).collect()
}

/// `(16 pi^2 / n) sum_{j=1}^{N} g g^T f^2`, the exact `Var*` of
/// `M* = (2 pi / sqrt n) sum_{G(n)} g (I* - f_hat)`.
pub fn v1_from_scores(scores: &[Vec<f64>], f_hat: &[f64], n: usize) -> Matrix {
    let m = scores.first().map_or(0, |g| g.len());
    let mut v = Matrix::zeros(m, m);
    for (g, f) in scores.iter().zip(f_hat) {
        let f2 = f * f;
        for r in 0..m {
            for c in 0..m {
                v[(r, c)] += g[r] * g[c] * f2;
            }
        }
    }
    symmetrize(&(v * (16.0 * PI * PI / n as f64)))
}

/// `V*_1` for the plain Whittle scores at `theta0`.
pub fn v1_star(f_hat: &SpectralDensityEstimate, family: &dyn SpectralFamily, theta0: &[f64]) -> Matrix {
    let scores: Vec<Vec<f64>> =
        f_hat.grid().positive_frequencies().iter().map(|&l| family.score_vector(theta0, l)).collect();
    v1_from_scores(&scores, f_hat.values(), f_hat.grid().n())
}

/// `M* = (2 pi / sqrt n) sum_{G(n)} g (spec - f_hat)` for one pseudo spectrum.
pub fn m_star(scores: &[Vec<f64>], spec: &[f64], f_hat: &[f64], n: usize) -> Vector {
    let m = scores.first().map_or(0, |g| g.len());
    let mut out = Vector::zeros(m);
    for ((g, s), f) in scores.iter().zip(spec).zip(f_hat) {
        for r in 0..m {
            out[r] += g[r] * (s - f);
        }
    }
    out * (4.0 * PI / (n as f64).sqrt())
}

/// `W* = d^2/dtheta^2 D_n(theta, spec)` at `theta0`.
pub fn w_star(lik: &Likelihood, family: &dyn SpectralFamily, theta0: &[f64], spec: &[f64]) -> Result<Matrix> {
    lik.hessian(family, theta0, spec)
}

/// `Z* = V1*^{-1/2} W* sqrt(n) (theta* - theta0)`.
pub fn z_star(v1: &Matrix, w: &Matrix, theta_star: &[f64], theta0: &[f64], n: usize) -> Result<Vector> {
    Ok(standardizer(v1)? * w * scaled_difference(theta_star, theta0, n))
}

fn scaled_difference(theta_star: &[f64], theta0: &[f64], n: usize) -> Vector {
    let sn = (n as f64).sqrt();
    Vector::from_iterator(theta0.len(), theta_star.iter().zip(theta0).map(|(a, b)| sn * (a - b)))
}

/// `V2+ = sym(Sigma+ - C+)`.
pub fn v2_plus(sigma: &Matrix, c: &Matrix) -> Matrix {
    symmetrize(&(sigma - c))
}

/// `L* = W*^{-1} (V1* + V2+)^{1/2} Z*`, with the sum projected onto the PSD
/// cone before the square root. Returns `L*` and the clamped eigenvalue mass.
pub fn assemble_l_star(w: &Matrix, v1: &Matrix, v2: &Matrix, z: &Vector) -> Result<(Vector, f64)> {
    let (proj, mass) = project_psd(&symmetrize(&(v1 + v2)))?;
    let root = psd_sqrt(&proj, 0.0)?;
    Ok((invert(w)? * root * z, mass))
}

/// Exact conditional moments of the convolved-subsampling vector `M+`.
#[derive(Debug, Clone)]
pub struct ConvolvedSubsampling {
    n: usize,
    b: usize,
    /// `Y_t = (2 pi / b) sum_{G(b)} g f_hat (U_t - 1)` for every window `t`.
    residuals: Vec<Vector>,
    sigma_plus: Matrix,
    c_plus: Matrix,
}

impl ConvolvedSubsampling {
    /// `f_hat_b` and `scores_b` are `f_hat` and the scores at `lambda_{j,b}`, `j = 1..=b/2`.
    pub fn new(windows: &SubsamplePeriodograms, f_hat_b: &[f64], scores_b: &[Vec<f64>]) -> Result<Self> {
        let h = windows.half();
        if f_hat_b.len() != h || scores_b.len() != h {
            return Err(invalid!("need {h} values at the subsample frequencies"));
        }
        let m = scores_b.first().map_or(0, |g| g.len());
        let b = windows.b();
        let f_tilde = SubsampleMeanSpectrum::from_windows(windows).floored();
        let count = windows.windows();
        let mut residuals = Vec::with_capacity(count);
        let mut sq_mean = vec![0.0; h];
        for t in 0..count {
            let mut y = Vector::zeros(m);
            for (j, &i) in windows.window(t).iter().enumerate() {
                let u = i / f_tilde[j];
                sq_mean[j] += u * u;
                let w = f_hat_b[j] * (u - 1.0);
                for r in 0..m {
                    y[r] += scores_b[j][r] * w;
                }
            }
            residuals.push(y * (4.0 * PI / b as f64));
        }
        let mean = residuals.iter().fold(Vector::zeros(m), |acc, y| acc + y) / count as f64;
        let mut second = Matrix::zeros(m, m);
        for y in &residuals {
            second += y * y.transpose();
        }
        second /= count as f64;
        let sigma_plus = symmetrize(&((second - &mean * mean.transpose()) * b as f64));
        let mut c_plus = Matrix::zeros(m, m);
        for j in 0..h {
            let k = f_hat_b[j] * f_hat_b[j] * (sq_mean[j] / count as f64 - 1.0);
            for r in 0..m {
                for c in 0..m {
                    c_plus[(r, c)] += scores_b[j][r] * scores_b[j][c] * k;
                }
            }
        }
        let c_plus = symmetrize(&(c_plus * (16.0 * PI * PI / b as f64)));
        Ok(ConvolvedSubsampling { n: windows.n(), b, residuals, sigma_plus, c_plus })
    }

    pub fn block(&self) -> usize {
        self.b
    }

    /// Number of windows averaged in one draw, `k = floor(n / b)`.
    pub fn k(&self) -> usize {
        self.n / self.b
    }

    pub fn residuals(&self) -> &[Vector] {
        &self.residuals
    }

    /// `Sigma+ = Var*(M+)`.
    pub fn sigma_plus(&self) -> &Matrix {
        &self.sigma_plus
    }

    pub fn c_plus(&self) -> &Matrix {
        &self.c_plus
    }

    pub fn v2_plus(&self) -> Matrix {
        v2_plus(&self.sigma_plus, &self.c_plus)
    }

    /// One draw of `M+ = sqrt(k b) k^{-1} sum_l Y_{i_l}` with `i_l` uniform over windows.
    pub fn m_plus<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        let k = self.k();
        let m = self.sigma_plus.nrows();
        let mut acc = Vector::zeros(m);
        for _ in 0..k {
            acc += &self.residuals[rng.random_range(0..self.residuals.len())];
        }
        acc * ((k * self.b) as f64).sqrt() / k as f64
    }
}

/// Spectrum entering the objective for the observed series: the periodogram,
/// its tapered version, or the real part of the boundary-extended periodogram.
pub fn data_spectrum(series: &TimeSeries, variant: Variant) -> Result<Vec<f64>> {
    Ok(match variant {
        Variant::Standard | Variant::Debiased => periodogram(series).into_ordinates(),
        Variant::Tapered(spec) => tapered_periodogram(series, &taper_weights(spec, series.len())?)?.into_ordinates(),
        Variant::Boundary(p) => {
            if 2 * p >= series.len() {
                return Err(invalid!("AR order {p} must be below n/2"));
            }
            boundary_periodogram(series, &yule_walker(series, p)?).real()
        }
    })
}

/// Session-level quantities, fixed given the data.
#[derive(Debug, Clone)]
pub struct BootstrapComponents {
    pub n: usize,
    pub block: usize,
    pub theta_hat: ParamEstimate,
    pub theta0: Vec<f64>,
    pub v1_star: Matrix,
    pub sigma_plus: Matrix,
    pub c_plus: Matrix,
    pub v2_plus: Matrix,
    /// Eigenvalue mass removed when projecting `V1* + V2+` onto the PSD cone.
    pub clamped_mass: f64,
    pub bandwidth: f64,
    /// AR order of the boundary correction (0 for other variants).
    pub boundary_order: usize,
}

/// One completed replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateDraw {
    pub theta_star: Vec<f64>,
    pub l_star: Vec<f64>,
    pub z_star: Vec<f64>,
    /// `sqrt(n) (theta* - theta0)`, the multiplicative bootstrap alone.
    pub multiplicative: Vec<f64>,
    pub w_star: Matrix,
    /// Draws rejected (non-convergence or numerical failure) before this one.
    pub discarded: usize,
}

/// Sorted-sample quantile, linear interpolation between order statistics
/// (`(B - 1) p` convention).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted_column(rows: &[Vec<f64>], k: usize) -> Vec<f64> {
    let mut v: Vec<f64> = rows.iter().map(|r| r[k]).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Bootstrap approximation of the law of `sqrt(n) (theta_hat - theta_0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapDistribution {
    pub n: usize,
    pub theta_hat: Vec<f64>,
    /// `L*` draws, one row per replicate.
    pub samples: Vec<Vec<f64>>,
    /// `sqrt(n) (theta* - theta0)` draws.
    pub multiplicative: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
}

impl BootstrapDistribution {
    pub fn replicates(&self) -> usize {
        self.samples.len()
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.samples.iter().map(|r| r[k]).collect()
    }

    pub fn quantile(&self, k: usize, p: f64) -> f64 {
        quantile_sorted(&sorted_column(&self.samples, k), p)
    }

    /// Percentile interval `[theta_hat - q_{1-a/2}/sqrt n, theta_hat - q_{a/2}/sqrt n]`.
    pub fn percentile_ci(&self, k: usize, level: f64) -> (f64, f64) {
        percentile_interval(&sorted_column(&self.samples, k), self.theta_hat[k], self.n, level)
    }

    /// Percentile interval from the multiplicative draws alone.
    pub fn multiplicative_ci(&self, k: usize, level: f64) -> (f64, f64) {
        percentile_interval(&sorted_column(&self.multiplicative, k), self.theta_hat[k], self.n, level)
    }
}

fn percentile_interval(sorted: &[f64], theta: f64, n: usize, level: f64) -> (f64, f64) {
    let a = (1.0 - level) / 2.0;
    let sn = (n as f64).sqrt();
    (theta - quantile_sorted(sorted, 1.0 - a) / sn, theta - quantile_sorted(sorted, a) / sn)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapDiagnostics {
    pub discarded: usize,
    pub clamped_mass: f64,
    pub b_cubed_over_n: f64,
    /// Largest condition number of `W*` over the replicates.
    pub max_w_condition: f64,
}

#[derive(Debug, Clone)]
pub struct BootstrapOutcome {
    pub components: BootstrapComponents,
    /// Average of the replicate `W*` matrices.
    pub w_star_mean: Matrix,
    pub distribution: BootstrapDistribution,
    pub diagnostics: BootstrapDiagnostics,
}

/// Prepared bootstrap: data-side estimates and the non-random matrices.
/// Replicates are independent and may be computed in any order.
pub struct HybridSession<'a> {
    family: &'a dyn SpectralFamily,
    config: BootstrapConfig,
    lik: Likelihood,
    f_hat: SpectralDensityEstimate,
    sqrt_f: Vec<f64>,
    plan: FftPlan,
    taper: Option<Taper>,
    components: BootstrapComponents,
    v1_standardizer: Matrix,
    combined_root: Matrix,
}

impl<'a> HybridSession<'a> {
    /// Steps shared by all replicates: `f_hat`, `theta_hat`, `theta0`, `V1*`,
    /// `Sigma+`, `C+` and `V2+`.
    pub fn prepare(series: &TimeSeries, family: &'a dyn SpectralFamily, config: &BootstrapConfig) -> Result<Self> {
        let i_n = periodogram(series);
        let f_hat = cv_spectral_estimate(&i_n)?;
        Self::prepare_with(series, family, config, f_hat)
    }

    /// As [`prepare`](Self::prepare) with a supplied spectral density estimate.
    pub fn prepare_with(
        series: &TimeSeries,
        family: &'a dyn SpectralFamily,
        config: &BootstrapConfig,
        f_hat: SpectralDensityEstimate,
    ) -> Result<Self> {
        let n = series.len();
        config.validate(n)?;
        if f_hat.grid().n() != n {
            return Err(invalid!("spectral estimate is for n = {}, series has n = {n}", f_hat.grid().n()));
        }
        let b = config.block_for(n);
        let lik = Likelihood::new(config.objective(), n)?;
        let taper = match config.variant {
            Variant::Tapered(spec) => Some(taper_weights(spec, n)?),
            _ => None,
        };

        let data_spec = data_spectrum(series, config.variant)?;
        let boundary_order = match config.variant {
            Variant::Boundary(p) => p,
            _ => 0,
        };
        let theta_hat = fit(&lik, family, &data_spec, None)?;
        let theta0 = fit(&lik, family, f_hat.values(), None)?;
        if !theta0.converged {
            return Err(Error::Numerical(format!(
                "minimiser of D_n(., f_hat) did not converge (score norm {:e})",
                theta0.score_norm
            )));
        }
        let theta0 = theta0.theta;

        let scores = grid_scores(&lik, family, &theta0);
        let mut v1 = v1_from_scores(&scores, f_hat.values(), n);
        if let Some(t) = &taper {
            v1 *= t.variance_factor();
        }

        let window_taper = match config.variant {
            Variant::Tapered(spec) => Some(spec),
            _ => None,
        };
        let windows = subsample_periodograms(series, b, window_taper)?;
        let lambdas_b = FourierGrid::new(b)?.positive_frequencies();
        let scores_b: Vec<Vec<f64>> = match config.variant {
            Variant::Debiased => debiased_scores_at(family, &theta0, n, &lambdas_b),
            _ => lambdas_b.iter().map(|&l| family.score_vector(&theta0, l)).collect(),
        };
        let conv = ConvolvedSubsampling::new(&windows, &f_hat.on_grid(b), &scores_b)?;
        let v2 = conv.v2_plus();

        let v1_standardizer = standardizer(&v1)?;
        let (proj, clamped_mass) = project_psd(&symmetrize(&(&v1 + &v2)))?;
        let combined_root = psd_sqrt(&proj, 0.0)?;
        let sqrt_f = (0..n as i64).map(|s| f_hat.at_index(s).sqrt()).collect();

        let components = BootstrapComponents {
            n,
            block: b,
            theta_hat,
            theta0,
            v1_star: v1,
            sigma_plus: conv.sigma_plus().clone(),
            c_plus: conv.c_plus().clone(),
            v2_plus: v2,
            clamped_mass,
            bandwidth: f_hat.bandwidth(),
            boundary_order,
        };
        Ok(HybridSession {
            family,
            config: config.clone(),
            lik,
            f_hat,
            sqrt_f,
            plan: FftPlan::new(n),
            taper,
            components,
            v1_standardizer,
            combined_root,
        })
    }

    pub fn components(&self) -> &BootstrapComponents {
        &self.components
    }

    pub fn config(&self) -> &BootstrapConfig {
        &self.config
    }

    pub fn likelihood(&self) -> &Likelihood {
        &self.lik
    }

    pub fn f_hat(&self) -> &SpectralDensityEstimate {
        &self.f_hat
    }

    fn max_discards(&self) -> usize {
        self.config.replicates / 20
    }

    /// Pseudo spectrum for one replicate, per variant.
    fn pseudo_spectrum(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        match self.config.variant {
            Variant::Standard | Variant::Debiased => Ok(mult_pseudo_periodogram(&self.f_hat, rng).into_ordinates()),
            Variant::Tapered(_) => {
                let x = pseudo_series_with(&self.sqrt_f, &self.plan, rng)?;
                Ok(tapered_pseudo_periodogram(&x.series, self.taper.as_ref().expect("taper"))?.into_ordinates())
            }
            Variant::Boundary(p) => {
                let x = pseudo_series_with(&self.sqrt_f, &self.plan, rng)?;
                let fit = yule_walker(&x.series, p)?;
                Ok(boundary_periodogram(&x.series, &fit).real())
            }
        }
    }

    fn attempt(&self, rng: &mut ChaCha8Rng) -> Result<ReplicateDraw> {
        let spec = self.pseudo_spectrum(rng)?;
        let theta0 = &self.components.theta0;
        let est = self.lik.minimize(self.family, &spec, core::slice::from_ref(theta0))?;
        if !est.converged {
            return Err(Error::Numerical(format!("replicate did not converge (score norm {:e})", est.score_norm)));
        }
        let w = self.lik.hessian(self.family, theta0, &spec)?;
        let d = scaled_difference(&est.theta, theta0, self.components.n);
        let z = &self.v1_standardizer * &w * &d;
        let l = invert(&w)? * &self.combined_root * &z;
        if l.iter().chain(z.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numerical(String::from("non-finite replicate")));
        }
        Ok(ReplicateDraw {
            theta_star: est.theta,
            l_star: l.iter().copied().collect(),
            z_star: z.iter().copied().collect(),
            multiplicative: d.iter().copied().collect(),
            w_star: w,
            discarded: 0,
        })
    }

    /// Replicate `index`, drawn from its own random stream. Failed draws are
    /// discarded and redrawn from the same stream.
    pub fn replicate(&self, index: usize) -> Result<ReplicateDraw> {
        let mut rng = replicate_rng(self.config.seed, index as u64);
        let mut discarded = 0;
        loop {
            match self.attempt(&mut rng) {
                Ok(mut draw) => {
                    draw.discarded = discarded;
                    return Ok(draw);
                }
                Err(e @ Error::InvalidInput(_)) => return Err(e),
                Err(_) if discarded < self.max_discards() => discarded += 1,
                Err(_) => {
                    return Err(Error::TooManyDiscarded {
                        discarded: discarded + 1,
                        requested: self.config.replicates,
                    })
                }
            }
        }
    }

    /// Combines replicates (in index order) into the bootstrap distribution.
    pub fn finish(&self, draws: Vec<ReplicateDraw>) -> Result<BootstrapOutcome> {
        let discarded: usize = draws.iter().map(|d| d.discarded).sum();
        if discarded > self.max_discards() {
            return Err(Error::TooManyDiscarded { discarded, requested: self.config.replicates });
        }
        let m = self.family.dim();
        let mut w_mean = Matrix::zeros(m, m);
        let mut max_cond: f64 = 0.0;
        for d in &draws {
            w_mean += &d.w_star;
            max_cond = max_cond.max(condition_number(&d.w_star));
        }
        w_mean /= draws.len().max(1) as f64;
        let c = &self.components;
        let distribution = BootstrapDistribution {
            n: c.n,
            theta_hat: c.theta_hat.theta.clone(),
            samples: draws.iter().map(|d| d.l_star.clone()).collect(),
            multiplicative: draws.iter().map(|d| d.multiplicative.clone()).collect(),
            z: draws.into_iter().map(|d| d.z_star).collect(),
        };
        let b = c.block as f64;
        Ok(BootstrapOutcome {
            components: c.clone(),
            w_star_mean: w_mean,
            distribution,
            diagnostics: BootstrapDiagnostics {
                discarded,
                clamped_mass: c.clamped_mass,
                b_cubed_over_n: b * b * b / c.n as f64,
                max_w_condition: max_cond,
            },
        })
    }

    /// All replicates, sequentially.
    pub fn run(&self) -> Result<BootstrapOutcome> {
        let draws = (0..self.config.replicates).map(|i| self.replicate(i)).collect::<Result<Vec<_>>>()?;
        self.finish(draws)
    }
}

/// Full pipeline for any variant: prepare, draw `B` replicates, assemble.
pub fn run_hybrid_bootstrap(series: &TimeSeries, family: &dyn SpectralFamily, config: &BootstrapConfig) -> Result<BootstrapOutcome> {
    HybridSession::prepare(series, family, config)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{ArFamily, WhiteNoiseFamily};

    fn ar1_series(n: usize, a: f64, seed: u64) -> TimeSeries {
        let mut rng = replicate_rng(seed, 999);
        let mut x = 0.0;
        let mut v = Vec::with_capacity(n);
        for t in 0..n + 200 {
            x = a * x + rng.sample::<f64, _>(StandardNormal);
            if t >= 200 {
                v.push(x);
            }
        }
        TimeSeries::new(v).unwrap()
    }

    fn frob_rel(a: &Matrix, b: &Matrix) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn default_block_rule() {
        assert_eq!(default_block(1000), 22);
        assert_eq!(default_block(321), 17);
        assert_eq!(default_block(256), 16);
    }

    #[test]
    fn config_validation() {
        assert!(BootstrapConfig::new(99, 1).validate(500).is_err());
        assert!(BootstrapConfig::new(100, 1).with_block(3).validate(500).is_err());
        assert!(BootstrapConfig::new(100, 1).with_block(501).validate(500).is_err());
        assert!(BootstrapConfig::new(100, 1).with_block(500).validate(500).is_ok());
        let c = BootstrapConfig::new(100, 1).with_variant(Variant::Debiased).with_estimator(Estimator::Innovation);
        assert!(c.validate(500).is_err());
        assert_eq!(BootstrapConfig::new(100, 1).objective(), Objective::Standard);
    }

    #[test]
    fn white_noise_v1_direct_sum() {
        let n = 64;
        let grid = FourierGrid::new(n).unwrap();
        let c = 0.7;
        let fh = SpectralDensityEstimate::from_density(grid, |_| c).unwrap();
        let s2 = 2.0 * PI * c;
        let v = v1_star(&fh, &WhiteNoiseFamily, &[s2]);
        // g = 1/s2^2 at every frequency
        let want = 16.0 * PI * PI / n as f64 * (n / 2) as f64 * c * c / (s2 * s2 * s2 * s2);
        assert!((v[(0, 0)] - want).abs() < 1e-12 * want);
    }

    #[test]
    fn z_star_scalar_and_zero() {
        let v = Matrix::from_element(1, 1, 4.0);
        let w = Matrix::from_element(1, 1, 3.0);
        let z = z_star(&v, &w, &[1.1], &[1.0], 100).unwrap();
        assert!((z[0] - 3.0 * 10.0 * 0.1 / 2.0).abs() < 1e-12);
        let z0 = z_star(&v, &w, &[1.0], &[1.0], 100).unwrap();
        assert_eq!(z0[0], 0.0);
        assert!(z_star(&Matrix::zeros(1, 1), &w, &[1.0], &[1.0], 100).is_err());
    }

    #[test]
    fn l_star_scalar_and_degenerate_chain() {
        let v1 = Matrix::from_element(1, 1, 4.0);
        let v2 = Matrix::from_element(1, 1, 5.0);
        let w = Matrix::from_element(1, 1, 2.0);
        let z = Vector::from_element(1, 1.5);
        let (l, mass) = assemble_l_star(&w, &v1, &v2, &z).unwrap();
        assert!((l[0] - 3.0 * 1.5 / 2.0).abs() < 1e-12);
        assert_eq!(mass, 0.0);
        // V2 = 0: L* reproduces sqrt(n)(theta* - theta0)
        let v1 = Matrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let w = Matrix::from_row_slice(2, 2, &[1.5, -0.2, -0.2, 0.8]);
        let d = [0.02, -0.05];
        let z = z_star(&v1, &w, &[1.0 + d[0], 0.5 + d[1]], &[1.0, 0.5], 400).unwrap();
        let (l, _) = assemble_l_star(&w, &v1, &Matrix::zeros(2, 2), &z).unwrap();
        assert!((l[0] - 20.0 * d[0]).abs() < 1e-8 && (l[1] - 20.0 * d[1]).abs() < 1e-8);
    }

    #[test]
    fn projection_reports_clamped_mass() {
        let v1 = Matrix::from_element(1, 1, 1.0);
        let v2 = Matrix::from_element(1, 1, -3.0);
        let (l, mass) = assemble_l_star(&Matrix::identity(1, 1), &v1, &v2, &Vector::from_element(1, 1.0)).unwrap();
        assert_eq!(l[0], 0.0);
        assert!((mass - 2.0).abs() < 1e-12);
    }

    #[test]
    fn v2_plus_symmetrises() {
        let s = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 2.0]);
        let c = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let v = v2_plus(&s, &c);
        assert_eq!(v, Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]));
        assert_eq!(v2_plus(&s, &s).norm(), 0.0);
    }

    #[test]
    fn convolved_closed_forms_match_direct_sums() {
        // hand-sized case n = 12, b = 4: one positive frequency pair per window
        let x = TimeSeries::new(vec![0.3, -1.2, 0.8, 1.5, -0.4, 0.9, -2.0, 0.1, 0.7, -0.6, 1.1, -0.2]).unwrap();
        let w = subsample_periodograms(&x, 4, None).unwrap();
        let fb = [0.5, 0.8];
        let g = [vec![1.3], vec![-0.4]];
        let conv = ConvolvedSubsampling::new(&w, &fb, &g).unwrap();
        let count = w.windows();
        let mut ft = [0.0; 2];
        for t in 0..count {
            for j in 0..2 {
                ft[j] += w.window(t)[j] / count as f64;
            }
        }
        let mut c = 0.0;
        let mut s = 0.0;
        for j1 in 0..2 {
            let mut sq = 0.0;
            for t in 0..count {
                sq += (w.window(t)[j1] / ft[j1]).powi(2) / count as f64;
            }
            c += 16.0 * PI * PI / 4.0 * g[j1][0] * g[j1][0] * fb[j1] * fb[j1] * (sq - 1.0);
            for j2 in 0..2 {
                let mut cross = 0.0;
                for t in 0..count {
                    cross += w.window(t)[j1] / ft[j1] * w.window(t)[j2] / ft[j2] / count as f64;
                }
                // four sign combinations of the G(b) double sum
                s += 4.0 * 4.0 * PI * PI / 4.0 * g[j1][0] * g[j2][0] * fb[j1] * fb[j2] * (cross - 1.0);
            }
        }
        assert!((conv.c_plus()[(0, 0)] - c).abs() < 1e-12 * c.abs().max(1.0));
        assert!((conv.sigma_plus()[(0, 0)] - s).abs() < 1e-12 * s.abs().max(1.0));
    }

    #[test]
    fn constant_ratio_windows_give_zero_c_plus() {
        // b = n leaves one window, whose ratio to f_tilde is identically one
        let x = ar1_series(32, 0.4, 3);
        let w = subsample_periodograms(&x, 32, None).unwrap();
        let conv = ConvolvedSubsampling::new(&w, &vec![1.0; 16], &vec![vec![1.0, 2.0]; 16]).unwrap();
        assert!(conv.c_plus().norm() < 1e-12);
        assert!(conv.sigma_plus().norm() < 1e-12);
        let mut rng = replicate_rng(1, 0);
        let m = conv.m_plus(&mut rng);
        assert!(m.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn m_plus_moments() {
        let x = ar1_series(400, 0.6, 5);
        let w = subsample_periodograms(&x, 18, None).unwrap();
        let fam = ArFamily::new(1);
        let th = [1.0, 0.6];
        let lam = FourierGrid::new(18).unwrap().positive_frequencies();
        let g: Vec<Vec<f64>> = lam.iter().map(|&l| fam.score_vector(&th, l)).collect();
        let fb: Vec<f64> = lam.iter().map(|&l| fam.density(&th, l)).collect();
        let conv = ConvolvedSubsampling::new(&w, &fb, &g).unwrap();
        let mut rng = replicate_rng(7, 0);
        let draws: Vec<Vector> = (0..10_000).map(|_| conv.m_plus(&mut rng)).collect();
        let mean = draws.iter().fold(Vector::zeros(2), |a, d| a + d) / 10_000.0;
        let mut cov = Matrix::zeros(2, 2);
        for d in &draws {
            let e = d - &mean;
            cov += &e * e.transpose();
        }
        cov /= 9_999.0;
        for r in 0..2 {
            let se = (cov[(r, r)] / 10_000.0).sqrt();
            assert!(mean[r].abs() < 3.0 * se, "mean {} se {}", mean[r], se);
        }
        assert!(frob_rel(&cov, conv.sigma_plus()) < 0.05);
    }

    #[test]
    fn pseudo_series_is_real_with_exponential_ordinates() {
        let n = 128;
        let grid = FourierGrid::new(n).unwrap();
        let fam = ArFamily::new(1);
        let fh = SpectralDensityEstimate::from_density(grid, |l| fam.density(&[1.0, 0.5], l)).unwrap();
        let mut rng = replicate_rng(11, 0);
        let ps = gaussian_pseudo_series(&fh, &mut rng).unwrap();
        let i = periodogram(&ps.series);
        for j in 1..=n / 2 {
            let want = fh.values()[j - 1] * ps.z[j].norm_sqr();
            assert!((i.ordinates()[j - 1] - want).abs() < 1e-8 * want.max(1.0));
        }
        let rect = taper_weights(TaperSpec::Rectangular, n).unwrap();
        let it = tapered_pseudo_periodogram(&ps.series, &rect).unwrap();
        assert_eq!(it.ordinates(), i.ordinates());
    }

    #[test]
    fn pseudo_series_variance_for_flat_spectrum() {
        let n = 64;
        let c = 0.3;
        let fh = SpectralDensityEstimate::from_density(FourierGrid::new(n).unwrap(), |_| c).unwrap();
        let mut rng = replicate_rng(2, 0);
        let mut acc = 0.0;
        let reps = 2000;
        for _ in 0..reps {
            let ps = gaussian_pseudo_series(&fh, &mut rng).unwrap();
            acc += ps.series.values().iter().map(|v| v * v).sum::<f64>() / n as f64;
        }
        let var = acc / reps as f64;
        assert!((var / (2.0 * PI * c) - 1.0).abs() < 0.1);
    }

    #[test]
    fn zero_series_zero_periodogram() {
        let z = TimeSeries::new(vec![0.0; 16]).unwrap();
        let t = taper_weights(TaperSpec::Tukey(0.2), 16).unwrap();
        assert!(tapered_pseudo_periodogram(&z, &t).unwrap().ordinates().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn multiplicative_periodogram_moments() {
        let n = 32;
        let fh = SpectralDensityEstimate::from_density(FourierGrid::new(n).unwrap(), |l| 1.0 + l).unwrap();
        let mut rng = replicate_rng(4, 0);
        let reps = 10_000;
        let mut s = vec![0.0; 16];
        let mut s2 = vec![0.0; 16];
        let mut cross = 0.0;
        for _ in 0..reps {
            let p = mult_pseudo_periodogram(&fh, &mut rng);
            for j in 0..16 {
                let u = p.ordinates()[j] / fh.values()[j];
                s[j] += u;
                s2[j] += u * u;
            }
            cross += (p.ordinates()[2] / fh.values()[2] - 1.0) * (p.ordinates()[9] / fh.values()[9] - 1.0);
        }
        // se of the mean is 0.01 and of the variance about 0.028 per frequency
        for j in 0..16 {
            let m = s[j] / reps as f64;
            let v = s2[j] / reps as f64 - m * m;
            let (tm, tv) = if j == 2 { (0.03, 0.1) } else { (0.045, 0.13) };
            assert!((m - 1.0).abs() < tm && (v - 1.0).abs() < tv, "j={j} mean {m} var {v}");
        }
        assert!((cross / reps as f64).abs() < 0.05);
    }

    #[test]
    fn v1_star_matches_monte_carlo() {
        let x = ar1_series(256, 0.7, 8);
        let fh = cv_spectral_estimate(&periodogram(&x)).unwrap();
        let fam = ArFamily::new(1);
        let lik = Likelihood::new(Objective::Standard, 256).unwrap();
        let th0 = fit(&lik, &fam, fh.values(), None).unwrap().theta;
        let scores = grid_scores(&lik, &fam, &th0);
        let v1 = v1_from_scores(&scores, fh.values(), 256);
        assert!(frob_rel(&v1, &v1_star(&fh, &fam, &th0)) < 1e-12);
        let mut rng = replicate_rng(9, 0);
        let reps = 10_000;
        let draws: Vec<Vector> = (0..reps)
            .map(|_| m_star(&scores, mult_pseudo_periodogram(&fh, &mut rng).ordinates(), fh.values(), 256))
            .collect();
        let mut cov = Matrix::zeros(2, 2);
        for d in &draws {
            cov += d * d.transpose();
        }
        cov /= reps as f64;
        assert!(frob_rel(&cov, &v1) < 0.05);
    }

    #[test]
    fn same_seed_same_distribution() {
        let x = ar1_series(200, 0.5, 21);
        let fam = ArFamily::new(1);
        let cfg = BootstrapConfig::new(100, 77);
        let a = run_hybrid_bootstrap(&x, &fam, &cfg).unwrap();
        let b = run_hybrid_bootstrap(&x, &fam, &cfg).unwrap();
        assert_eq!(a.distribution, b.distribution);
        let c = run_hybrid_bootstrap(&x, &fam, &BootstrapConfig::new(100, 78)).unwrap();
        assert_ne!(a.distribution, c.distribution);
    }

    #[test]
    fn replicates_are_order_independent() {
        let x = ar1_series(150, 0.3, 5);
        let fam = ArFamily::new(1);
        let s = HybridSession::prepare(&x, &fam, &BootstrapConfig::new(100, 3)).unwrap();
        let fwd: Vec<_> = (0..5).map(|i| s.replicate(i).unwrap()).collect();
        let back: Vec<_> = (0..5).rev().map(|i| s.replicate(i).unwrap()).collect();
        for (i, d) in fwd.iter().enumerate() {
            assert_eq!(d, &back[4 - i]);
        }
    }

    #[test]
    fn debiased_white_noise_equals_standard() {
        let x = ar1_series(128, 0.0, 6);
        let std_cfg = BootstrapConfig::new(100, 5);
        let db_cfg = std_cfg.clone().with_variant(Variant::Debiased);
        let a = run_hybrid_bootstrap(&x, &WhiteNoiseFamily, &std_cfg).unwrap();
        let b = run_hybrid_bootstrap(&x, &WhiteNoiseFamily, &db_cfg).unwrap();
        assert_eq!(a.distribution, b.distribution);
        assert_eq!(a.components.v2_plus, b.components.v2_plus);
    }

    #[test]
    fn innovation_estimator_matches_closed_form_per_replicate() {
        let x = ar1_series(300, 0.6, 12);
        let fam = ArFamily::new(1);
        let cfg = BootstrapConfig::new(100, 1).with_estimator(Estimator::Innovation);
        let s = HybridSession::prepare(&x, &fam, &cfg).unwrap();
        let a_hat = crate::whittle::ar1_closed_form(&periodogram(&x)).unwrap();
        assert!((s.components().theta_hat.theta[1] - a_hat).abs() < 1e-12);
        let mut rng = replicate_rng(1, 0);
        let spec = mult_pseudo_periodogram(s.f_hat(), &mut rng);
        let d = s.replicate(0).unwrap();
        assert!((d.theta_star[1] - crate::whittle::ar1_closed_form(&spec).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn variants_run() {
        let x = ar1_series(256, 0.5, 13);
        let fam = ArFamily::new(1);
        for v in [Variant::Tapered(TaperSpec::Tukey(0.1)), Variant::Boundary(1), Variant::Boundary(0), Variant::Debiased] {
            let out = run_hybrid_bootstrap(&x, &fam, &BootstrapConfig::new(100, 2).with_variant(v)).unwrap();
            assert_eq!(out.distribution.replicates(), 100);
            assert!(out.distribution.samples.iter().flatten().all(|v| v.is_finite()));
            let (lo, hi) = out.distribution.percentile_ci(1, 0.95);
            assert!(lo < hi);
        }
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert!((quantile_sorted(&v, 0.5) - 2.5).abs() < 1e-15);
        assert!((quantile_sorted(&v, 0.25) - 1.75).abs() < 1e-15);
    }
}
