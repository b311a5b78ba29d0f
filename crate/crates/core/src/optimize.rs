//! Damped Newton and Nelder-Mead minimisers for smooth objectives that
//! return `+inf` outside their domain.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{cholesky_solve, Matrix, Vector};

/// Objective with analytic first and second derivatives.
pub trait Problem {
    fn dim(&self) -> usize;
    /// Objective value, `+inf` when `x` is inadmissible.
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn hessian(&self, x: &[f64]) -> Matrix;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Newton iterations with a Levenberg ridge (added until the shifted Hessian
/// is positive definite) and Armijo backtracking.
pub fn newton(p: &dyn Problem, x0: &[f64], max_iter: usize) -> Outcome {
    let m = p.dim();
    let mut x = x0.to_vec();
    let mut f = p.value(&x);
    let mut g = if f.is_finite() { p.gradient(&x) } else { vec![f64::NAN; m] };
    let mut it = 0;
    while it < max_iter && f.is_finite() {
        let gn = norm(&g);
        if gn <= 1e-13 * (1.0 + norm(&x)) {
            break;
        }
        it += 1;
        let h = p.hessian(&x);
        let rhs = -Vector::from_column_slice(&g);
        let scale = (0..m).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
        let mut mu = 0.0;
        let mut accepted = false;
        for _ in 0..40 {
            let shifted = &h + Matrix::identity(m, m) * mu;
            if let Some(d) = cholesky_solve(&shifted, &rhs) {
                let slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
                let mut t = 1.0;
                while t > 1e-12 {
                    let xn: Vec<f64> = x.iter().zip(d.iter()).map(|(a, b)| a + t * b).collect();
                    let fnew = p.value(&xn);
                    if fnew.is_finite() && fnew <= f + 1e-4 * t * slope {
                        let gnew = p.gradient(&xn);
                        // accept only genuine progress: lower value or smaller gradient
                        if fnew < f || norm(&gnew) < gn {
                            x = xn;
                            f = fnew;
                            g = gnew;
                            accepted = true;
                        }
                        break;
                    }
                    t *= 0.5;
                }
                if accepted {
                    break;
                }
            }
            mu = if mu == 0.0 { 1e-10 * scale } else { mu * 10.0 };
        }
        if !accepted {
            break;
        }
    }
    let gradient_norm = if f.is_finite() { norm(&g) } else { f64::INFINITY };
    Outcome { x, value: f, gradient_norm, iterations: it }
}

/// Derivative-free Nelder-Mead with adaptive initial simplex.
pub fn nelder_mead(p: &dyn Problem, x0: &[f64], max_iter: usize) -> Outcome {
    let m = p.dim();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(m + 1);
    simplex.push((x0.to_vec(), p.value(x0)));
    for i in 0..m {
        let mut x = x0.to_vec();
        let step = if x[i].abs() > 1e-8 { 0.05 * x[i].abs() } else { 0.05 };
        x[i] += step;
        let mut fx = p.value(&x);
        if !fx.is_finite() {
            x[i] = x0[i] - step;
            fx = p.value(&x);
        }
        simplex.push((x, fx));
    }
    let mut it = 0;
    while it < max_iter {
        it += 1;
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Greater));
        let best = simplex[0].1;
        let worst = simplex[m].1;
        if worst.is_finite() && (worst - best).abs() <= 1e-15 * (1.0 + best.abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..m)
            .map(|d| simplex[..m].iter().map(|s| s.0[d]).sum::<f64>() / m as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[m].0).map(|(c, w)| c + t * (c - w)).collect()
        };
        let xr = along(1.0);
        let fr = p.value(&xr);
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = p.value(&xe);
            simplex[m] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[m - 1].1 {
            simplex[m] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[m].1 {
                let xc = along(0.5);
                let fc = p.value(&xc);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = p.value(&xc);
                (xc, fc)
            };
            if fc < simplex[m].1.min(fr) {
                simplex[m] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    let xs: Vec<f64> = s.0.iter().zip(&x_best).map(|(a, b)| b + 0.5 * (a - b)).collect();
                    let fs = p.value(&xs);
                    *s = (xs, fs);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Greater));
    let (x, value) = simplex.swap_remove(0);
    let gradient_norm = if value.is_finite() { norm(&p.gradient(&x)) } else { f64::INFINITY };
    Outcome { x, value, gradient_norm, iterations: it }
}
