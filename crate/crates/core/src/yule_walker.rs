//! Yule-Walker autoregressive fitting via the Levinson-Durbin recursion.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::spectral::TimeSeries;

#[derive(Debug, Clone, PartialEq)]
pub struct YuleWalkerFit {
    pub order: usize,
    /// `phi_1..phi_p` of `X_t = sum_k phi_k X_{t-k} + e_t`.
    pub coefficients: Vec<f64>,
    pub innovation_variance: f64,
    /// `gamma(0..=p)` used in the fit.
    pub autocovariances: Vec<f64>,
}

/// Biased sample autocovariances (divisor `n`) of the mean-corrected series.
pub fn sample_autocovariances(series: &TimeSeries, max_lag: usize) -> Vec<f64> {
    let x = series.centered();
    let v = x.values();
    let n = v.len();
    (0..=max_lag.min(n - 1))
        .map(|h| v[..n - h].iter().zip(&v[h..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
        .collect()
}

/// Solves the order-`p` Toeplitz system for autocovariances `gamma(0..=p)`.
pub fn levinson_durbin(gamma: &[f64], p: usize) -> Result<YuleWalkerFit> {
    if gamma.len() <= p {
        return Err(invalid!("need {} autocovariances for order {p}, got {}", p + 1, gamma.len()));
    }
    let g0 = gamma[0];
    if !(g0 > 0.0) || !g0.is_finite() {
        return Err(Error::Numerical(alloc::format!("non-positive variance {g0}")));
    }
    let mut phi: Vec<f64> = Vec::with_capacity(p);
    let mut v = g0;
    for k in 1..=p {
        let acc = gamma[k] - phi.iter().enumerate().map(|(i, a)| a * gamma[k - 1 - i]).sum::<f64>();
        let kappa = acc / v;
        if !kappa.is_finite() || kappa.abs() >= 1.0 {
            return Err(Error::Numerical(alloc::format!(
                "Toeplitz system is singular at order {k} (reflection coefficient {kappa})"
            )));
        }
        let prev = phi.clone();
        for i in 0..k - 1 {
            phi[i] = prev[i] - kappa * prev[k - 2 - i];
        }
        phi.push(kappa);
        v *= 1.0 - kappa * kappa;
    }
    Ok(YuleWalkerFit {
        order: p,
        coefficients: phi,
        innovation_variance: v,
        autocovariances: gamma[..=p].to_vec(),
    })
}

pub fn yule_walker(series: &TimeSeries, p: usize) -> Result<YuleWalkerFit> {
    let n = series.len();
    if 2 * p >= n {
        return Err(invalid!("AR order {p} must be below n/2 = {}", n / 2));
    }
    levinson_durbin(&sample_autocovariances(series, p), p)
}

/// AR order minimising `n log v_p + 2p` over `0..=max_p`.
pub fn aic_order(series: &TimeSeries, max_p: usize) -> Result<usize> {
    let n = series.len();
    let max_p = max_p.min((n - 1) / 2);
    let gamma = sample_autocovariances(series, max_p);
    let mut best = (f64::INFINITY, 0);
    for p in 0..=max_p {
        let fit = match levinson_durbin(&gamma, p) {
            Ok(f) => f,
            Err(_) => break,
        };
        let aic = n as f64 * fit.innovation_variance.ln() + 2.0 * p as f64;
        if aic < best.0 {
            best = (aic, p);
        }
    }
    Ok(best.1)
}

/// Default boundary-correction order: AIC over `0..=10 floor(log10 n)`.
pub fn default_boundary_order(series: &TimeSeries) -> Result<usize> {
    let n = series.len() as f64;
    aic_order(series, 10 * n.log10().floor() as usize)
}

/// Autocovariances `gamma(0..=max_lag)` of a causal AR(p) process.
pub fn ar_autocovariances(phi: &[f64], sigma2: f64, max_lag: usize) -> Vec<f64> {
    // psi-weights of the MA(infinity) representation, truncated once negligible
    let mut psi = vec![1.0];
    loop {
        let k = psi.len();
        let next: f64 = phi.iter().enumerate().filter(|(i, _)| *i < k).map(|(i, a)| a * psi[k - 1 - i]).sum();
        psi.push(next);
        let tail = psi.iter().rev().take(phi.len().max(1)).map(|v| v.abs()).fold(0.0, f64::max);
        if (k > 50 && tail < 1e-17) || k > 200_000 {
            break;
        }
    }
    (0..=max_lag)
        .map(|h| sigma2 * psi.iter().zip(psi.iter().skip(h)).map(|(a, b)| a * b).sum::<f64>())
        .collect()
}
