//! Data-generating processes for the Monte Carlo study, the exact sampling
//! distribution of the AR(1) Whittle coefficient, and the Wasserstein-1
//! distance between empirical laws.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bootstrap::replicate_rng;
use crate::error::{invalid, Error, Result};
use crate::spectral::{periodogram, TimeSeries};
use crate::whittle::ar1_closed_form;

pub const BURN_IN: usize = 1000;
/// Laplace scale of the innovations of Models II and III.
pub const LAPLACE_SCALE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimulationModel {
    /// `X_t = 0.8 X_{t-1} + e_t`, standard normal `e_t`.
    ModelI,
    /// `X_t = 0.75 X_{t-1} + 0.6 X_{t-1} e_{t-1} + e_t`, Laplace `e_t`.
    ModelII,
    /// `X_t = -0.3 X_{t-1} + e_t` if `X_{t-1} <= 0`, else `0.8 X_{t-1} + e_t`; Laplace `e_t`.
    ModelIII,
}

impl SimulationModel {
    pub const ALL: [SimulationModel; 3] = [SimulationModel::ModelI, SimulationModel::ModelII, SimulationModel::ModelIII];

    pub fn tag(&self) -> &'static str {
        match self {
            SimulationModel::ModelI => "I",
            SimulationModel::ModelII => "II",
            SimulationModel::ModelIII => "III",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        let t = t.strip_prefix("model").or_else(|| t.strip_prefix("Model")).unwrap_or(t).trim_start_matches(['_', ' ', '-']);
        match t {
            "I" | "i" | "1" => Ok(SimulationModel::ModelI),
            "II" | "ii" | "2" => Ok(SimulationModel::ModelII),
            "III" | "iii" | "3" => Ok(SimulationModel::ModelIII),
            _ => Err(invalid!("unknown model {s:?} (expected I, II or III)")),
        }
    }

    fn innovation<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            SimulationModel::ModelI => rng.sample(StandardNormal),
            _ => laplace_sample(LAPLACE_SCALE, rng),
        }
    }

    fn step(&self, x: f64, e_prev: f64, e: f64) -> f64 {
        match self {
            SimulationModel::ModelI => 0.8 * x + e,
            SimulationModel::ModelII => 0.75 * x + 0.6 * x * e_prev + e,
            SimulationModel::ModelIII => {
                if x <= 0.0 {
                    -0.3 * x + e
                } else {
                    0.8 * x + e
                }
            }
        }
    }
}

/// Draw from the Laplace law with density `(2 s)^{-1} exp(-|x| / s)`.
pub fn laplace_sample<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    // inverse CDF on u in (-1/2, 1/2)
    let u: f64 = rng.random::<f64>() - 0.5;
    let r = 1.0 - 2.0 * u.abs();
    if r <= 0.0 {
        return 0.0;
    }
    -scale * u.signum() * r.ln()
}

/// Path `X_1..X_n` after a burn-in of [`BURN_IN`] steps from `X_0 = 0`.
pub fn generate<R: Rng + ?Sized>(model: SimulationModel, n: usize, rng: &mut R) -> Result<TimeSeries> {
    if n < 50 {
        return Err(invalid!("simulated series need n >= 50, got {n}"));
    }
    let mut x = 0.0;
    let mut e_prev = 0.0;
    let mut out = Vec::with_capacity(n);
    for t in 0..BURN_IN + n {
        let e = model.innovation(rng);
        x = model.step(x, e_prev, e);
        e_prev = e;
        if !x.is_finite() {
            return Err(Error::Numerical(format!("model {} path diverged at step {t}", model.tag())));
        }
        if t >= BURN_IN {
            out.push(x);
        }
    }
    TimeSeries::new(out)
}

/// Lag-one autocorrelation of a single path of the given length, the
/// parameter `a_0` of the best-fitting AR(1).
pub fn a0_oracle(model: SimulationModel, length: usize, seed: u64) -> f64 {
    let mut rng = replicate_rng(seed, u64::MAX);
    let (mut x, mut e_prev) = (0.0, 0.0);
    for _ in 0..BURN_IN {
        let e = model.innovation(&mut rng);
        x = model.step(x, e_prev, e);
        e_prev = e;
    }
    let (mut s, mut ss, mut sp) = (0.0, 0.0, 0.0);
    let mut first = 0.0;
    let mut prev = 0.0;
    for t in 0..length {
        let e = model.innovation(&mut rng);
        x = model.step(x, e_prev, e);
        e_prev = e;
        if t == 0 {
            first = x;
        } else {
            sp += prev * x;
        }
        s += x;
        ss += x * x;
        prev = x;
    }
    let n = length as f64;
    let mean = s / n;
    // sum_{t<n} (x_t - m)(x_{t+1} - m) expanded
    let lag1 = sp - mean * (2.0 * s - first - prev) + (n - 1.0) * mean * mean;
    lag1 / (ss - n * mean * mean)
}

/// Draw `index` of `sqrt(n) (a_hat - a0)` with `a_hat` the closed-form
/// AR(1) Whittle coefficient.
pub fn exact_draw(model: SimulationModel, n: usize, a0: f64, seed: u64, index: u64) -> Result<f64> {
    let mut rng = replicate_rng(seed, index);
    let x = generate(model, n, &mut rng)?;
    Ok((n as f64).sqrt() * (ar1_closed_form(&periodogram(&x))? - a0))
}

/// `R` independent draws of `sqrt(n) (a_hat - a0)` (sequential).
pub fn exact_distribution(model: SimulationModel, n: usize, r: usize, a0: f64, seed: u64) -> Result<Vec<f64>> {
    (0..r as u64).map(|i| exact_draw(model, n, a0, seed, i)).collect()
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Left-continuous empirical quantile `F^{-1}(u) = x_(ceil(u n))`.
fn empirical_quantile(sorted: &[f64], u: f64) -> f64 {
    let n = sorted.len();
    let k = (u * n as f64).ceil() as usize;
    sorted[k.clamp(1, n) - 1]
}

const D1_GRID: usize = 10_000;

/// `d_1(F, G) = int_0^1 |F^{-1}(u) - G^{-1}(u)| du` between two empirical laws.
pub fn d1_distance(f: &[f64], g: &[f64]) -> Result<f64> {
    if f.is_empty() || g.is_empty() {
        return Err(invalid!("d1 needs non-empty samples"));
    }
    let (a, b) = (sorted(f), sorted(g));
    if a.len() == b.len() {
        return Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64);
    }
    let m = D1_GRID as f64;
    Ok((0..D1_GRID)
        .map(|k| {
            let u = (k as f64 + 0.5) / m;
            (empirical_quantile(&a, u) - empirical_quantile(&b, u)).abs()
        })
        .sum::<f64>()
        / m)
}

/// `d_1` between an empirical law and a continuous law with quantile
/// function `q`, by the midpoint rule with `per_atom` nodes per order statistic.
pub fn d1_to_quantile_function(sample: &[f64], q: impl Fn(f64) -> f64, per_atom: usize) -> Result<f64> {
    if sample.is_empty() || per_atom == 0 {
        return Err(invalid!("d1 needs a non-empty sample"));
    }
    let s = sorted(sample);
    let total = (s.len() * per_atom) as f64;
    let mut acc = 0.0;
    for (i, x) in s.iter().enumerate() {
        for k in 0..per_atom {
            let u = ((i * per_atom + k) as f64 + 0.5) / total;
            acc += (x - q(u)).abs();
        }
    }
    Ok(acc / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn laplace_moments() {
        let mut rng = replicate_rng(1, 0);
        let n = 100_000;
        let v: Vec<f64> = (0..n).map(|_| laplace_sample(0.1, &mut rng)).collect();
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        let m4 = v.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 * (var / n as f64).sqrt());
        assert!((var / 0.02 - 1.0).abs() < 0.05);
        assert!((m4 / (var * var) - 3.0 - 3.0).abs() < 0.45);
    }

    #[test]
    fn model_one_autocorrelation() {
        let mut rng = replicate_rng(2, 0);
        let x = generate(SimulationModel::ModelI, 100_000, &mut rng).unwrap();
        let g = crate::yule_walker::sample_autocovariances(&x, 1);
        assert!((g[1] / g[0] - 0.8).abs() < 0.01);
    }

    #[test]
    fn model_three_drifts_up() {
        let mut rng = replicate_rng(3, 0);
        let x = generate(SimulationModel::ModelIII, 100_000, &mut rng).unwrap();
        assert!(x.mean() > 0.0);
    }

    #[test]
    fn model_two_is_stable() {
        let mut rng = replicate_rng(4, 0);
        let x = generate(SimulationModel::ModelII, 100_000, &mut rng).unwrap();
        let v = x.values();
        let var = |s: &[f64]| {
            let m = s.iter().sum::<f64>() / s.len() as f64;
            s.iter().map(|a| (a - m).powi(2)).sum::<f64>() / s.len() as f64
        };
        let (a, b) = (var(&v[..50_000]), var(&v[50_000..]));
        assert!(a.is_finite() && (a / b - 1.0).abs() < 0.2);
    }

    #[test]
    fn short_series_rejected() {
        let mut rng = replicate_rng(0, 0);
        assert!(generate(SimulationModel::ModelI, 49, &mut rng).is_err());
    }

    #[test]
    fn a0_streaming_matches_direct() {
        let a = a0_oracle(SimulationModel::ModelIII, 5000, 9);
        // same path through the batch routine
        let mut rng = replicate_rng(9, u64::MAX);
        let m = SimulationModel::ModelIII;
        let (mut x, mut ep) = (0.0, 0.0);
        let mut path = vec![];
        for t in 0..BURN_IN + 5000 {
            let e = m.innovation(&mut rng);
            x = m.step(x, ep, e);
            ep = e;
            if t >= BURN_IN {
                path.push(x);
            }
        }
        let g = crate::yule_walker::sample_autocovariances(&TimeSeries::new(path).unwrap(), 1);
        assert!((a - g[1] / g[0]).abs() < 1e-12);
    }

    #[test]
    fn model_one_a0() {
        assert!((a0_oracle(SimulationModel::ModelI, 2_000_000, 1) - 0.8).abs() < 0.002);
    }

    #[test]
    fn d1_basic_identities() {
        let f = [0.3, -1.0, 2.0, 0.7];
        assert_eq!(d1_distance(&f, &f).unwrap(), 0.0);
        let g: Vec<f64> = f.iter().map(|x| x + 0.25).collect();
        assert!((d1_distance(&f, &g).unwrap() - 0.25).abs() < 1e-12);
        assert!((d1_distance(&[0.0], &[1.5, 1.5, 1.5]).unwrap() - 1.5).abs() < 1e-12);
        assert!(d1_distance(&[], &f).is_err());
    }

    #[test]
    fn d1_unequal_sizes_grid() {
        // F uniform atoms {0, 1}, G atoms {0, 1, 2}: quantile functions differ on (1/3, 1/2] by 1 and (2/3, 1] by 1
        let d = d1_distance(&[0.0, 1.0], &[0.0, 1.0, 2.0]).unwrap();
        assert!((d - (1.0 / 6.0 + 1.0 / 3.0)).abs() < 1e-3);
    }

    #[test]
    fn d1_to_point_mass() {
        let d = d1_to_quantile_function(&[1.0, 3.0], |_| 2.0, 5).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_draws_are_reproducible() {
        let a = exact_distribution(SimulationModel::ModelI, 100, 3, 0.8, 5).unwrap();
        let b = exact_distribution(SimulationModel::ModelI, 100, 3, 0.8, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(exact_distribution(SimulationModel::ModelI, 100, 1, 0.8, 5).unwrap().len(), 1);
    }

    #[test]
    fn model_names() {
        assert_eq!(SimulationModel::parse("II").unwrap(), SimulationModel::ModelII);
        assert_eq!(SimulationModel::parse("model3").unwrap(), SimulationModel::ModelIII);
        assert!(SimulationModel::parse("IV").is_err());
    }
}
