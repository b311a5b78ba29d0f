//! Boundary-extended Fourier transform and periodogram.
//!
//! The series is extended beyond both ends by AR(p) best linear predictions;
//! `J_hat` is the Fourier transform of the predicted part, available in
//! closed form from the Yule-Walker coefficients.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::fft::FftPlan;
use crate::spectral::{dft_values, FourierGrid, TimeSeries};
use crate::yule_walker::YuleWalkerFit;

fn cis(x: f64) -> Complex64 {
    Complex64::new(x.cos(), x.sin())
}

/// Fourier transform of the predicted extension at frequency `lambda`, for the
/// mean-corrected values `x` and AR coefficients `phi`.
pub fn extension_dft(x: &[f64], phi: &[f64], lambda: f64) -> Complex64 {
    let p = phi.len();
    if p == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let n = x.len();
    // phi(lambda) = 1 - sum_s phi_s e^{-i s lambda}
    let mut poly = Complex64::new(1.0, 0.0);
    for (s, &c) in phi.iter().enumerate() {
        poly -= c * cis(-((s + 1) as f64) * lambda);
    }
    let mut front = Complex64::new(0.0, 0.0);
    let mut back = Complex64::new(0.0, 0.0);
    for l in 1..=p {
        let mut inner_front = Complex64::new(0.0, 0.0);
        let mut inner_back = Complex64::new(0.0, 0.0);
        for s in 0..=p - l {
            let c = phi[l + s - 1];
            inner_front += c * cis(s as f64 * lambda);
            inner_back += c * cis(-((s + 1) as f64) * lambda);
        }
        front += x[l - 1] * inner_front;
        back += x[n - l] * inner_back;
    }
    // poly(-lambda) = conj(poly(lambda)) for real coefficients
    front / poly.conj() + cis(-(n as f64) * lambda) * back / poly
}

/// Plain and boundary-extended transforms at `lambda_1..lambda_N`.
#[derive(Debug, Clone)]
pub struct BoundaryDft {
    pub j: Vec<Complex64>,
    pub j_hat: Vec<Complex64>,
}

impl BoundaryDft {
    /// `J_tilde = J + J_hat`.
    pub fn extended(&self) -> Vec<Complex64> {
        self.j.iter().zip(&self.j_hat).map(|(a, b)| a + b).collect()
    }
}

pub fn boundary_extension_dft(series: &TimeSeries, fit: &YuleWalkerFit, grid: FourierGrid) -> BoundaryDft {
    let x = series.centered();
    let n = x.len();
    debug_assert_eq!(grid.n(), n);
    let all = dft_values(x.values(), &FftPlan::new(n));
    let big_n = grid.half();
    let j: Vec<Complex64> = all[1..=big_n].to_vec();
    let j_hat = (1..=big_n)
        .map(|k| extension_dft(x.values(), &fit.coefficients, grid.frequency(k as i64)))
        .collect();
    BoundaryDft { j, j_hat }
}

/// `I_tilde(lambda_j) = J_tilde(lambda_j) conj(J(lambda_j)) / (2 pi n)` for `j = 1..=N`.
#[derive(Debug, Clone)]
pub struct BoundaryPeriodogram {
    n: usize,
    values: Vec<Complex64>,
}

impl BoundaryPeriodogram {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn complex(&self) -> &[Complex64] {
        &self.values
    }

    /// Real parts, the spectrum entering the boundary-corrected objective.
    pub fn real(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }
}

pub fn boundary_periodogram(series: &TimeSeries, fit: &YuleWalkerFit) -> BoundaryPeriodogram {
    let n = series.len();
    let grid = FourierGrid::new(n).expect("series has at least 4 values");
    let d = boundary_extension_dft(series, fit, grid);
    let norm = 2.0 * PI * n as f64;
    let values = d
        .j
        .iter()
        .zip(&d.j_hat)
        .map(|(a, h)| {
            let t = a + h;
            // t * conj(a), with the real part written as re^2 + im^2 when h = 0
            Complex64::new((t.re * a.re + t.im * a.im) / norm, (t.im * a.re - t.re * a.im) / norm)
        })
        .collect();
    BoundaryPeriodogram { n, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::periodogram;
    use crate::yule_walker::yule_walker;
    use alloc::vec;

    fn fit_with(phi: &[f64]) -> YuleWalkerFit {
        YuleWalkerFit {
            order: phi.len(),
            coefficients: phi.to_vec(),
            innovation_variance: 1.0,
            autocovariances: vec![],
        }
    }

    /// Transform of the explicitly predicted extension, truncated far out.
    fn extension_oracle(x: &[f64], phi: &[f64], lambda: f64, horizon: usize) -> Complex64 {
        let n = x.len();
        let p = phi.len();
        let mut fwd: Vec<f64> = x.to_vec();
        let mut sum = Complex64::new(0.0, 0.0);
        for s in 1..=horizon {
            let k = fwd.len();
            let v: f64 = (0..p).map(|i| phi[i] * fwd[k - 1 - i]).sum();
            fwd.push(v);
            sum += v * cis(-((n + s) as f64) * lambda);
        }
        // backward predictions use the same coefficients (time reversibility)
        let mut bwd: Vec<f64> = x.iter().rev().copied().collect();
        for s in 1..=horizon {
            let k = bwd.len();
            let v: f64 = (0..p).map(|i| phi[i] * bwd[k - 1 - i]).sum();
            bwd.push(v);
            let t = 1.0 - s as f64;
            sum += v * cis(-t * lambda);
        }
        sum
    }

    #[test]
    fn order_zero_is_empty() {
        let s = TimeSeries::new(vec![1.0, 3.0, -2.0, 0.5, 4.0]).unwrap();
        let fit = fit_with(&[]);
        let d = boundary_extension_dft(&s, &fit, FourierGrid::new(5).unwrap());
        assert!(d.j_hat.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        let bp = boundary_periodogram(&s, &fit);
        let p = periodogram(&s);
        for (a, b) in bp.real().iter().zip(p.ordinates()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn ar1_matches_geometric_predictions() {
        let x = [1.0, 0.0, 0.0, 1.0];
        let phi = 0.6;
        for j in 1..=2 {
            let l = 2.0 * PI * j as f64 / 4.0;
            let got = extension_dft(&x, &[phi], l);
            // X_hat_{n+s} = phi^s X_n and X_hat_{1-s} = phi^s X_1 summed in closed form
            let r = phi * cis(-l);
            let fwd = x[3] * cis(-4.0 * l) * r / (1.0 - r);
            let q = phi * cis(l);
            let bwd = x[0] * cis(-l) * q / (1.0 - q);
            assert!((got - (fwd + bwd)).norm() < 1e-14);
            assert!((got - extension_oracle(&x, &[phi], l, 400)).norm() < 1e-12);
        }
    }

    #[test]
    fn ar1_direct_double_sum() {
        // hand evaluation of the double sum for p = 1: both inner sums are the single term phi
        let x = [1.0, 0.0, 0.0, 1.0];
        let phi = -0.4;
        let l = PI / 2.0;
        let poly = 1.0 - phi * cis(-l);
        let want = x[0] * phi / poly.conj() + cis(-4.0 * l) * x[3] * phi * cis(-l) / poly;
        assert!((extension_dft(&x, &[phi], l) - want).norm() < 1e-15);
    }

    #[test]
    fn ar3_matches_truncated_predictions() {
        let x: Vec<f64> = (0..25).map(|t| ((t as f64) * 0.9).sin() + 0.1 * t as f64 - 1.2).collect();
        let phi = [0.5, -0.3, 0.2];
        for j in [1usize, 4, 9, 12] {
            let l = 2.0 * PI * j as f64 / 25.0;
            let got = extension_dft(&x, &phi, l);
            let want = extension_oracle(&x, &phi, l, 3000);
            assert!((got - want).norm() < 1e-10 * want.norm().max(1.0), "j={j}: {got} vs {want}");
        }
    }

    #[test]
    fn boundary_periodogram_uses_fitted_coefficients() {
        let x: Vec<f64> = (0..64).map(|t| ((t as f64) * 0.35).cos() + ((t * t) as f64 * 0.01).sin()).collect();
        let s = TimeSeries::new(x).unwrap();
        let fit = yule_walker(&s, 2).unwrap();
        let bp = boundary_periodogram(&s, &fit);
        let c = s.centered();
        let p = periodogram(&s);
        for j in 1..=32usize {
            let l = 2.0 * PI * j as f64 / 64.0;
            let jj = dft_values(c.values(), &FftPlan::new(64))[j];
            let jt = jj + extension_dft(c.values(), &fit.coefficients, l);
            let want = jt * jj.conj() / (2.0 * PI * 64.0);
            assert!((bp.complex()[j - 1] - want).norm() < 1e-12);
            assert!((bp.real()[j - 1] - p.ordinates()[j - 1] - (want.re - jj.norm_sqr() / (2.0 * PI * 64.0))).abs() < 1e-12);
        }
    }
}
