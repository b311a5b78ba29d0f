//! Parametric spectral families.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use alloc::format;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};

/// Parametric class `{f_theta}` with derivatives of `1/f_theta`.
pub trait SpectralFamily: Send + Sync {
    /// Parameter dimension `m`.
    fn dim(&self) -> usize;

    /// Closed coordinate box containing the parameter space.
    fn bounds(&self) -> Vec<(f64, f64)>;

    /// Whether `theta` is an admissible (interior) parameter.
    fn contains(&self, theta: &[f64]) -> bool;

    fn density(&self, theta: &[f64], lambda: f64) -> f64;

    /// Returns `f_theta(lambda)` and writes the gradient of `1/f_theta` into
    /// `du` and, when requested, its Hessian (row-major) into `d2u`.
    fn inverse_derivatives(&self, theta: &[f64], lambda: f64, du: &mut [f64], d2u: Option<&mut [f64]>) -> f64;

    /// Lower bound `delta` of `f_theta` over the box and all frequencies.
    fn positivity_bound(&self) -> f64;

    fn parameter_names(&self) -> Vec<String>;

    /// True when `f_theta` does not depend on the frequency.
    fn is_constant_in_frequency(&self) -> bool {
        false
    }

    /// Coordinate of the innovation variance when `int log f_theta = 2 pi log(theta_k / 2 pi)`.
    fn innovation_index(&self) -> Option<usize> {
        None
    }

    /// Parameter implied by autocovariances `gamma(0..)` (method of moments).
    fn from_autocovariances(&self, gamma: &[f64]) -> Option<Vec<f64>>;

    /// Centre of the box, with the scale coordinate taken from `gamma(0)`.
    fn box_center(&self, gamma0: f64) -> Vec<f64>;

    /// Score `g_theta(lambda) = -(2 pi)^{-1} d/dtheta (1/f_theta)(lambda)`.
    fn score_vector(&self, theta: &[f64], lambda: f64) -> Vec<f64> {
        let mut du = vec![0.0; self.dim()];
        self.inverse_derivatives(theta, lambda, &mut du, None);
        du.iter().map(|d| -d / (2.0 * PI)).collect()
    }

    /// Gradient of `log f_theta(lambda)`.
    fn log_gradient(&self, theta: &[f64], lambda: f64) -> Vec<f64> {
        let mut du = vec![0.0; self.dim()];
        let f = self.inverse_derivatives(theta, lambda, &mut du, None);
        du.iter().map(|d| -f * d).collect()
    }

    /// Hessian (row-major) of `log f_theta(lambda)`.
    fn log_hessian(&self, theta: &[f64], lambda: f64) -> Vec<f64> {
        let m = self.dim();
        let mut du = vec![0.0; m];
        let mut d2u = vec![0.0; m * m];
        let f = self.inverse_derivatives(theta, lambda, &mut du, Some(&mut d2u));
        let mut out = vec![0.0; m * m];
        for r in 0..m {
            for c in 0..m {
                out[r * m + c] = -f * d2u[r * m + c] + f * f * du[r] * du[c];
            }
        }
        out
    }
}

/// Causal AR(p) spectra `sigma^2 / (2 pi) |1 - sum_k a_k e^{-ik lambda}|^{-2}`,
/// `theta = (sigma^2, a_1, ..., a_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArFamily {
    p: usize,
}

/// Every root of the AR polynomial must have modulus above this margin.
pub const ROOT_MARGIN: f64 = 1.001;
pub const SIGMA2_MIN: f64 = 1e-10;
pub const SIGMA2_MAX: f64 = 1e10;

impl ArFamily {
    pub fn new(p: usize) -> Self {
        ArFamily { p }
    }

    pub fn order(&self) -> usize {
        self.p
    }

    fn coefficient_bound(&self, k: usize) -> f64 {
        binomial(self.p, k) * ROOT_MARGIN.powi(-(k as i32))
    }

    /// `|1 - sum a_k e^{-ik lambda}|^2` and its real/imaginary parts.
    fn transfer(&self, a: &[f64], lambda: f64) -> (f64, f64) {
        let mut re = 1.0;
        let mut im = 0.0;
        for (k, &ak) in a.iter().enumerate() {
            let x = (k + 1) as f64 * lambda;
            re -= ak * x.cos();
            im += ak * x.sin();
        }
        (re, im)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Whether all roots of `1 - sum phi_k z^k` lie strictly outside the unit circle
/// (Schur-Cohn step-down through the reflection coefficients).
pub fn is_causal(phi: &[f64]) -> bool {
    let mut a = phi.to_vec();
    while let Some(&kappa) = a.last() {
        if !kappa.is_finite() || kappa.abs() >= 1.0 {
            return false;
        }
        let p = a.len();
        let d = 1.0 - kappa * kappa;
        let prev: Vec<f64> = (0..p - 1).map(|k| (a[k] + kappa * a[p - 2 - k]) / d).collect();
        a = prev;
    }
    true
}

impl SpectralFamily for ArFamily {
    fn dim(&self) -> usize {
        self.p + 1
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(SIGMA2_MIN, SIGMA2_MAX)];
        b.extend((1..=self.p).map(|k| {
            let c = self.coefficient_bound(k);
            (-c, c)
        }));
        b
    }

    fn contains(&self, theta: &[f64]) -> bool {
        if theta.len() != self.dim() || theta.iter().any(|v| !v.is_finite()) {
            return false;
        }
        if !(theta[0] > SIGMA2_MIN && theta[0] < SIGMA2_MAX) {
            return false;
        }
        let scaled: Vec<f64> = theta[1..]
            .iter()
            .enumerate()
            .map(|(k, a)| a * ROOT_MARGIN.powi(k as i32 + 1))
            .collect();
        is_causal(&scaled)
    }

    fn density(&self, theta: &[f64], lambda: f64) -> f64 {
        let (re, im) = self.transfer(&theta[1..], lambda);
        theta[0] / (2.0 * PI * (re * re + im * im))
    }

    fn inverse_derivatives(&self, theta: &[f64], lambda: f64, du: &mut [f64], d2u: Option<&mut [f64]>) -> f64 {
        let s2 = theta[0];
        let a = &theta[1..];
        let (re, im) = self.transfer(a, lambda);
        let big_a = re * re + im * im;
        let c = 2.0 * PI / s2;
        du[0] = -c * big_a / s2;
        for k in 1..=self.p {
            let x = k as f64 * lambda;
            let da = -2.0 * re * x.cos() + 2.0 * im * x.sin();
            du[k] = c * da;
        }
        if let Some(h) = d2u {
            let m = self.dim();
            h[0] = 2.0 * c * big_a / (s2 * s2);
            for k in 1..=self.p {
                let v = -du[k] / s2;
                h[k] = v;
                h[k * m] = v;
            }
            for k in 1..=self.p {
                for l in 1..=self.p {
                    h[k * m + l] = 2.0 * c * ((k as f64 - l as f64) * lambda).cos();
                }
            }
        }
        s2 / (2.0 * PI * big_a)
    }

    fn positivity_bound(&self) -> f64 {
        let worst: f64 = 1.0 + (1..=self.p).map(|k| self.coefficient_bound(k)).sum::<f64>();
        SIGMA2_MIN / (2.0 * PI * worst * worst)
    }

    fn parameter_names(&self) -> Vec<String> {
        let mut v = vec![String::from("sigma2")];
        v.extend((1..=self.p).map(|k| format!("a{k}")));
        v
    }

    fn innovation_index(&self) -> Option<usize> {
        Some(0)
    }

    fn from_autocovariances(&self, gamma: &[f64]) -> Option<Vec<f64>> {
        let fit = crate::yule_walker::levinson_durbin(gamma, self.p).ok()?;
        let mut theta = vec![fit.innovation_variance];
        theta.extend_from_slice(&fit.coefficients);
        self.contains(&theta).then_some(theta)
    }

    fn box_center(&self, gamma0: f64) -> Vec<f64> {
        let mut theta = vec![0.0; self.dim()];
        theta[0] = gamma0.clamp(10.0 * SIGMA2_MIN, 0.1 * SIGMA2_MAX);
        theta
    }
}

/// Flat spectra `sigma^2 / (2 pi)`, `theta = (sigma^2)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WhiteNoiseFamily;

impl SpectralFamily for WhiteNoiseFamily {
    fn dim(&self) -> usize {
        1
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(SIGMA2_MIN, SIGMA2_MAX)]
    }

    fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == 1 && theta[0] > SIGMA2_MIN && theta[0] < SIGMA2_MAX
    }

    fn density(&self, theta: &[f64], _lambda: f64) -> f64 {
        theta[0] / (2.0 * PI)
    }

    fn inverse_derivatives(&self, theta: &[f64], _lambda: f64, du: &mut [f64], d2u: Option<&mut [f64]>) -> f64 {
        let s2 = theta[0];
        du[0] = -2.0 * PI / (s2 * s2);
        if let Some(h) = d2u {
            h[0] = 4.0 * PI / (s2 * s2 * s2);
        }
        s2 / (2.0 * PI)
    }

    fn positivity_bound(&self) -> f64 {
        SIGMA2_MIN / (2.0 * PI)
    }

    fn parameter_names(&self) -> Vec<String> {
        vec![String::from("sigma2")]
    }

    fn is_constant_in_frequency(&self) -> bool {
        true
    }

    fn innovation_index(&self) -> Option<usize> {
        Some(0)
    }

    fn from_autocovariances(&self, gamma: &[f64]) -> Option<Vec<f64>> {
        let theta = vec![*gamma.first()?];
        self.contains(&theta).then_some(theta)
    }

    fn box_center(&self, gamma0: f64) -> Vec<f64> {
        vec![gamma0.clamp(10.0 * SIGMA2_MIN, 0.1 * SIGMA2_MAX)]
    }
}

/// Parses `ar:p` / `ar(p)` / `white` family specifications.
pub fn parse_ar_order(spec: &str) -> Result<usize> {
    let s = spec.trim().to_ascii_lowercase();
    let body = s
        .strip_prefix("ar:")
        .or_else(|| s.strip_prefix("ar(").and_then(|r| r.strip_suffix(')')))
        .ok_or_else(|| invalid!("unknown family '{spec}', expected ar:p"))?;
    body.parse::<usize>().map_err(|_| invalid!("bad AR order in '{spec}'"))
}
