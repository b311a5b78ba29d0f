//! Discrete Fourier transforms of arbitrary length.
//!
//! Powers of two use an iterative radix-2 transform; every other length goes
//! through Bluestein's chirp-z identity on a power-of-two buffer.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// A precomputed transform of fixed length `n`.
///
/// `forward` computes `X_k = sum_t x_t exp(-2 pi i k t / n)` and `inverse`
/// the same sum with `+i`, both unnormalised.
#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Trivial,
    Radix2(Radix2),
    Bluestein(Bluestein),
}

#[derive(Debug, Clone)]
struct Radix2 {
    // twiddles[k] = exp(-2 pi i k / n) for k < n/2
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Bluestein {
    inner: Radix2,
    m: usize,
    // chirp[t] = exp(-i pi t^2 / n)
    chirp: Vec<Complex64>,
    // forward transform of the conjugate chirp filter
    filter: Vec<Complex64>,
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        let kind = if n <= 1 {
            Kind::Trivial
        } else if n.is_power_of_two() {
            Kind::Radix2(Radix2::new(n))
        } else {
            Kind::Bluestein(Bluestein::new(n))
        };
        FftPlan { n, kind }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n, "buffer length does not match plan");
        match &self.kind {
            Kind::Trivial => {}
            Kind::Radix2(r) => r.run(buf),
            Kind::Bluestein(b) => b.run(buf),
        }
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        for z in buf.iter_mut() {
            *z = z.conj();
        }
        self.forward(buf);
        for z in buf.iter_mut() {
            *z = z.conj();
        }
    }
}

impl Radix2 {
    fn new(n: usize) -> Self {
        let bits = n.trailing_zeros();
        let twiddles = (0..n / 2)
            .map(|k| {
                let ang = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(ang.cos(), ang.sin())
            })
            .collect();
        let bitrev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Radix2 { twiddles, bitrev }
    }

    fn run(&self, buf: &mut [Complex64]) {
        let n = buf.len();
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        let inner = Radix2::new(m);
        let two_n = 2 * n as u128;
        let chirp: Vec<Complex64> = (0..n)
            .map(|t| {
                // t^2 mod 2n keeps the angle small and exact for large t
                let r = ((t as u128 * t as u128) % two_n) as f64;
                let ang = -PI * r / n as f64;
                Complex64::new(ang.cos(), ang.sin())
            })
            .collect();
        let mut filter = vec![Complex64::new(0.0, 0.0); m];
        filter[0] = chirp[0].conj();
        for t in 1..n {
            filter[t] = chirp[t].conj();
            filter[m - t] = chirp[t].conj();
        }
        inner.run(&mut filter);
        Bluestein { inner, m, chirp, filter }
    }

    fn run(&self, buf: &mut [Complex64]) {
        let n = buf.len();
        let mut work = vec![Complex64::new(0.0, 0.0); self.m];
        for t in 0..n {
            work[t] = buf[t] * self.chirp[t];
        }
        self.inner.run(&mut work);
        for (w, f) in work.iter_mut().zip(&self.filter) {
            *w = (*w * f).conj();
        }
        // inverse transform via conjugation
        self.inner.run(&mut work);
        let scale = 1.0 / self.m as f64;
        for k in 0..n {
            buf[k] = work[k].conj() * scale * self.chirp[k];
        }
    }
}

/// Forward transform of a real sequence (convenience wrapper).
pub fn fft_real(x: &[f64]) -> Vec<Complex64> {
    let plan = FftPlan::new(x.len());
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan.forward(&mut buf);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(x: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (t, &v)| {
                    let ang = sign * 2.0 * PI * ((k * t) % n) as f64 / n as f64;
                    acc + v * Complex64::new(ang.cos(), ang.sin())
                })
            })
            .collect()
    }

    fn sample(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|t| {
                let t = t as f64;
                Complex64::new((1.3 * t).sin() + 0.1 * t, (0.7 * t * t).cos())
            })
            .collect()
    }

    #[test]
    fn matches_direct_sum_for_many_lengths() {
        for n in [1usize, 2, 3, 4, 5, 6, 7, 8, 12, 16, 17, 22, 31, 64, 100, 321] {
            let x = sample(n);
            let mut y = x.clone();
            FftPlan::new(n).forward(&mut y);
            let want = direct(&x, -1.0);
            let scale = want.iter().map(|z| z.norm()).fold(1.0, f64::max);
            for (a, b) in y.iter().zip(&want) {
                assert!((a - b).norm() <= 1e-12 * scale * n as f64, "n={n}");
            }
        }
    }

    #[test]
    fn inverse_undoes_forward() {
        for n in [8usize, 15, 1000] {
            let x = sample(n);
            let plan = FftPlan::new(n);
            let mut y = x.clone();
            plan.forward(&mut y);
            plan.inverse(&mut y);
            for (a, b) in y.iter().zip(&x) {
                assert!((a / n as f64 - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn inverse_matches_direct_positive_exponent() {
        let x = sample(9);
        let mut y = x.clone();
        FftPlan::new(9).inverse(&mut y);
        for (a, b) in y.iter().zip(direct(&x, 1.0)) {
            assert!((a - b).norm() < 1e-11);
        }
    }
}
