//! Population quantities of the Whittle estimator under a true spectral
//! density `f`: the Hessian `W` of `D(theta, f)`, the Gaussian part `V1` of
//! the score covariance, and the fourth-cumulant part `V2` for linear
//! processes.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::family::SpectralFamily;
use crate::linalg::{invert, Matrix};
use crate::quadrature::integrate_vec;

const TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleMatrices {
    pub w: Matrix,
    pub v1: Matrix,
}

fn check_theta(family: &dyn SpectralFamily, theta: &[f64]) -> Result<()> {
    if theta.len() != family.dim() || !family.contains(theta) {
        return Err(Error::Domain(alloc::format!("{theta:?} is not an interior parameter")));
    }
    Ok(())
}

/// `W = (2 pi)^{-1} int [d^2 log f_theta + f d^2(1/f_theta)]` and
/// `V1 = 4 pi int g g^T f^2` over `[-pi, pi]`.
pub fn oracle_matrices(family: &dyn SpectralFamily, theta: &[f64], f: impl Fn(f64) -> f64) -> Result<OracleMatrices> {
    check_theta(family, theta)?;
    let m = family.dim();
    let mut du = vec![0.0; m];
    let mut d2u = vec![0.0; m * m];
    // integrands are even in lambda: integrate over [0, pi] and double
    let vals = integrate_vec(
        |l, out| {
            let ft = family.inverse_derivatives(theta, l, &mut du, Some(&mut d2u));
            let fl = f(l);
            for r in 0..m {
                for c in 0..m {
                    let log_h = -ft * d2u[r * m + c] + ft * ft * du[r] * du[c];
                    out[r * m + c] = (log_h + fl * d2u[r * m + c]) / (2.0 * PI);
                    // g = -du / 2 pi
                    out[m * m + r * m + c] = du[r] * du[c] * fl * fl / PI;
                }
            }
        },
        0.0,
        PI,
        2 * m * m,
        TOL,
    )?;
    let w = Matrix::from_row_slice(m, m, &vals[..m * m]) * 2.0;
    let v1 = Matrix::from_row_slice(m, m, &vals[m * m..]) * 2.0;
    Ok(OracleMatrices { w, v1 })
}

/// `V2 = eta4 (int g f)(int g f)^T` for a linear process with innovation
/// excess kurtosis `eta4`.
pub fn oracle_v2_linear(family: &dyn SpectralFamily, theta: &[f64], f: impl Fn(f64) -> f64, eta4: f64) -> Result<Matrix> {
    check_theta(family, theta)?;
    let m = family.dim();
    let mut du = vec![0.0; m];
    let half = integrate_vec(
        |l, out| {
            family.inverse_derivatives(theta, l, &mut du, None);
            let fl = f(l);
            for r in 0..m {
                out[r] = -du[r] / (2.0 * PI) * fl;
            }
        },
        0.0,
        PI,
        m,
        TOL,
    )?;
    let v: Vec<f64> = half.iter().map(|h| 2.0 * h).collect();
    Ok(Matrix::from_fn(m, m, |r, c| eta4 * v[r] * v[c]))
}

/// Limiting covariance `W^{-1} (V1 + V2) W^{-1}` of `sqrt(n) (theta_hat - theta_0)`.
pub fn asymptotic_covariance(w: &Matrix, v1: &Matrix, v2: &Matrix) -> Result<Matrix> {
    let wi = invert(w)?;
    Ok(&wi * (v1 + v2) * &wi)
}
