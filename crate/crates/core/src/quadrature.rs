//! Adaptive Gauss-Kronrod (7/15) quadrature for vector-valued integrands.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Segment {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

fn rule(f: &mut dyn FnMut(f64, &mut [f64]), a: f64, b: f64, dim: usize, buf: &mut [f64]) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    f(c, buf);
    for d in 0..dim {
        k[d] += WGK[7] * buf[d];
        g[d] += WG[3] * buf[d];
    }
    for i in 0..7 {
        let x = h * XGK[i];
        for (sign_x, _) in [(c - x, 0), (c + x, 1)] {
            f(sign_x, buf);
            for d in 0..dim {
                k[d] += WGK[i] * buf[d];
                if i % 2 == 1 {
                    g[d] += WG[i / 2] * buf[d];
                }
            }
        }
    }
    let mut err = 0.0;
    for d in 0..dim {
        k[d] *= h;
        g[d] *= h;
        err += (k[d] - g[d]) * (k[d] - g[d]);
    }
    Segment { a, b, value: k, error: err.sqrt() }
}

/// Integrates `f` (writing `dim` outputs) over `[a, b]` to absolute error
/// `tol * max(1, |I|)` in the Euclidean norm.
pub fn integrate_vec(mut f: impl FnMut(f64, &mut [f64]), a: f64, b: f64, dim: usize, tol: f64) -> Result<Vec<f64>> {
    let mut buf = vec![0.0; dim];
    let mut segs = vec![rule(&mut f, a, b, dim, &mut buf)];
    for _ in 0..5000 {
        let total: Vec<f64> = (0..dim).map(|d| segs.iter().map(|s| s.value[d]).sum()).collect();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        let norm = total.iter().map(|v| v * v).sum::<f64>().sqrt();
        if err <= tol * norm.max(1.0) {
            return Ok(total);
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        segs.push(rule(&mut f, s.a, mid, dim, &mut buf));
        segs.push(rule(&mut f, mid, s.b, dim, &mut buf));
    }
    Err(Error::Numerical(format!("quadrature did not reach tolerance {tol:e} on [{a}, {b}]")))
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_vec(|x, out| out[0] = f(x), a, b, 1, tol).map(|v| v[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn polynomial_and_trig() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 0.0).abs() < 1e-12);
        let v = integrate(|x| x.cos(), 0.0, PI / 2.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn peaked_integrand() {
        // integral of a narrow Lorentzian
        let e: f64 = 1e-3;
        let v = integrate(|x| e / (x * x + e * e), -1.0, 1.0, 1e-10).unwrap();
        let want = 2.0 * (1.0 / e).atan();
        assert!((v - want).abs() < 1e-8);
    }
}
