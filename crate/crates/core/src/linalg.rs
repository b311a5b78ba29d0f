//! Symmetric-matrix utilities: PSD square roots, projection and inversion.

use alloc::format;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

const SYMMETRY_TOL: f64 = 1e-8;

fn check_symmetric(a: &Matrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!("matrix is {}x{}, not square", a.nrows(), a.ncols())));
    }
    let scale = a.amax().max(1.0);
    let asym = (a - a.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::InvalidInput(format!("matrix is not symmetric (max deviation {asym:e})")));
    }
    Ok(())
}

/// `(A + A^T) / 2`.
pub fn symmetrize(a: &Matrix) -> Matrix {
    (a + a.transpose()) * 0.5
}

fn eigen(a: &Matrix) -> SymmetricEigen<f64, nalgebra::Dyn> {
    SymmetricEigen::new(symmetrize(a))
}

fn rebuild(e: &SymmetricEigen<f64, nalgebra::Dyn>, f: impl Fn(f64) -> f64) -> Matrix {
    let d = Matrix::from_diagonal(&e.eigenvalues.map(f));
    let q = &e.eigenvectors;
    symmetrize(&(q * d * q.transpose()))
}

/// Symmetric square root; eigenvalues below `tol * max` are set to zero.
pub fn psd_sqrt(a: &Matrix, tol: f64) -> Result<Matrix> {
    check_symmetric(a)?;
    let e = eigen(a);
    let cut = tol * e.eigenvalues.max().max(0.0);
    Ok(rebuild(&e, |l| if l < cut { 0.0 } else { l.sqrt() }))
}

/// Symmetric inverse square root; eigenvalues below `tol * max` are raised to it.
pub fn psd_inv_sqrt(a: &Matrix, tol: f64) -> Result<Matrix> {
    check_symmetric(a)?;
    let e = eigen(a);
    let max = e.eigenvalues.max();
    if !(max > 0.0) {
        return Err(Error::IllConditioned { eigenvalue: max, trace: a.trace() });
    }
    let cut = tol * max;
    Ok(rebuild(&e, |l| 1.0 / l.max(cut).sqrt()))
}

/// Projection onto the PSD cone by clamping negative eigenvalues at zero.
/// Returns the projection and the clamped mass (sum of removed negative eigenvalues).
pub fn project_psd(a: &Matrix) -> Result<(Matrix, f64)> {
    check_symmetric(a)?;
    let e = eigen(a);
    let mass: f64 = e.eigenvalues.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    Ok((rebuild(&e, |l| l.max(0.0)), mass))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &Matrix) -> f64 {
    eigen(a).eigenvalues.min()
}

/// Inverse square root used to standardise with `V`, rejecting matrices whose
/// smallest eigenvalue is below `1e-10 * trace`.
pub fn standardizer(v: &Matrix) -> Result<Matrix> {
    check_symmetric(v)?;
    let e = eigen(v);
    let min = e.eigenvalues.min();
    let trace = v.trace();
    if !(min > 1e-10 * trace) || !(trace > 0.0) {
        return Err(Error::IllConditioned { eigenvalue: min, trace });
    }
    Ok(rebuild(&e, |l| 1.0 / l.sqrt()))
}

/// 2-norm condition number estimated through the singular values.
pub fn condition_number(a: &Matrix) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse of a square matrix, failing when it is numerically singular.
pub fn invert(a: &Matrix) -> Result<Matrix> {
    let cond = condition_number(a);
    if !cond.is_finite() || cond > 1e14 {
        return Err(Error::Singular(cond));
    }
    a.clone().try_inverse().ok_or(Error::Singular(cond))
}

/// Solve `A x = b` for symmetric positive definite `A` (None if not PD).
pub fn cholesky_solve(a: &Matrix, b: &Vector) -> Option<Vector> {
    a.clone().cholesky().map(|c| c.solve(b))
}

/// `V^{1/2} (V^{1/2} S V^{1/2})^{-1/2} V^{1/2}`, the symmetric form of
/// `V (S V)^{-1/2}` obtained through the similarity `S V ~ V^{1/2} S V^{1/2}`.
pub fn w_hat_star(v: &Matrix, s: &Matrix) -> Result<Matrix> {
    check_symmetric(v)?;
    check_symmetric(s)?;
    let vh = psd_sqrt(v, 0.0)?;
    let inner = symmetrize(&(&vh * s * &vh));
    let inner_is = psd_inv_sqrt(&inner, 1e-12)?;
    Ok(symmetrize(&(&vh * inner_is * &vh)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn identity_and_diagonal() {
        let i = Matrix::identity(3, 3);
        assert!(close(&psd_sqrt(&i, 1e-12).unwrap(), &i, 1e-14));
        assert!(close(&psd_inv_sqrt(&i, 1e-12).unwrap(), &i, 1e-14));
        let d = Matrix::from_diagonal(&Vector::from_vec(alloc::vec![4.0, 9.0]));
        let want = Matrix::from_diagonal(&Vector::from_vec(alloc::vec![2.0, 3.0]));
        assert!(close(&psd_sqrt(&d, 1e-12).unwrap(), &want, 1e-14));
        assert!(close(&w_hat_star(&i, &i).unwrap(), &i, 1e-12));
    }

    #[test]
    fn rejects_asymmetric() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(psd_sqrt(&a, 1e-12).is_err());
    }

    #[test]
    fn projection_clamps_negative_part() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.5]);
        let (p, mass) = project_psd(&a).unwrap();
        assert!((mass - 0.5).abs() < 1e-15);
        assert!(close(&p, &Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]), 1e-15));
    }

    #[test]
    fn scalar_w_hat() {
        let v = Matrix::from_element(1, 1, 2.0);
        let w = 0.7;
        let s = Matrix::from_element(1, 1, 2.0 / (w * w));
        assert!((w_hat_star(&v, &s).unwrap()[(0, 0)] - w).abs() < 1e-12);
    }

    #[test]
    fn standardizer_rejects_degenerate() {
        let v = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(standardizer(&v), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn invert_rejects_singular() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(invert(&a), Err(Error::Singular(_))));
    }
}
