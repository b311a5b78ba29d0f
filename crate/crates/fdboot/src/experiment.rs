//! Monte Carlo comparison of bootstrap approximations to the exact law of
//! `sqrt(n) (a_hat - a0)` for AR(1) fits to the three simulation models.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use fdboot_core::bootstrap::{default_block, replicate_rng, BootstrapConfig, Estimator, HybridSession};
use fdboot_core::family::{ArFamily, SpectralFamily};
use fdboot_core::oracle::{asymptotic_covariance, oracle_matrices};
use fdboot_core::simulation::{a0_oracle, d1_distance, d1_to_quantile_function, exact_draw, generate, SimulationModel};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "all_models")]
    pub models: Vec<String>,
    #[serde(default = "default_n")]
    pub n: Vec<usize>,
    /// Subsample lengths; empty selects `round(4 n^{1/4})` per `n`.
    #[serde(default)]
    pub b: Vec<usize>,
    /// Bootstrap replicates per run.
    #[serde(rename = "B", default = "desk_b")]
    pub bootstrap_replicates: usize,
    /// Draws used to estimate the exact distribution.
    #[serde(rename = "R", default = "desk_r")]
    pub exact_replicates: usize,
    /// Monte Carlo repetitions per cell.
    #[serde(default = "desk_reps")]
    pub reps: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Path length for the `a0` oracle.
    #[serde(default = "default_a0_length")]
    pub a0_length: usize,
}

fn all_models() -> Vec<String> {
    SimulationModel::ALL.iter().map(|m| m.tag().to_string()).collect()
}
fn default_n() -> Vec<usize> {
    vec![1000]
}
fn desk_b() -> usize {
    400
}
fn desk_r() -> usize {
    2000
}
fn desk_reps() -> usize {
    100
}
fn default_seed() -> u64 {
    1
}
fn default_a0_length() -> usize {
    10_000_000
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            models: all_models(),
            n: default_n(),
            b: Vec::new(),
            bootstrap_replicates: desk_b(),
            exact_replicates: desk_r(),
            reps: desk_reps(),
            seed: default_seed(),
            a0_length: default_a0_length(),
        }
    }
}

impl ExperimentConfig {
    /// Replicate counts of the published study.
    pub fn full_scale(mut self) -> Self {
        self.bootstrap_replicates = 1000;
        self.exact_replicates = 10_000;
        self.reps = 500;
        self
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Input(format!("bad experiment config: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("bad experiment config: {e}")))
    }

    /// Reads TOML or JSON, chosen by extension.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(&text),
            _ => Self::from_toml(&text),
        }
    }

    pub fn parsed_models(&self) -> Result<Vec<SimulationModel>> {
        self.models.iter().map(|m| Ok(SimulationModel::parse(m)?)).collect()
    }

    pub fn blocks_for(&self, n: usize) -> Vec<usize> {
        if self.b.is_empty() {
            vec![default_block(n)]
        } else {
            self.b.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let models = self.parsed_models()?;
        let bad = |m: String| Err(CliError::Input(m));
        if models.is_empty() || self.n.is_empty() {
            return bad(String::from("need at least one model and one n"));
        }
        if self.exact_replicates < 500 {
            return bad(format!("R must be at least 500, got {}", self.exact_replicates));
        }
        if self.reps < 2 {
            return bad(format!("need at least 2 repetitions, got {}", self.reps));
        }
        if self.a0_length < 10_000 {
            return bad(format!("a0 path length {} is too short", self.a0_length));
        }
        for &n in &self.n {
            if n < 50 {
                return bad(format!("n = {n} is below 50"));
            }
            for b in self.blocks_for(n) {
                BootstrapConfig::new(self.bootstrap_replicates, 0).with_block(b).validate(n)?;
            }
        }
        Ok(())
    }
}

/// Rough cost of a configuration, reported before running.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkEstimate {
    pub simulated_series: u64,
    pub whittle_fits: u64,
    /// Floating point operations, order of magnitude only.
    pub flops: f64,
}

pub fn estimate_work(cfg: &ExperimentConfig) -> WorkEstimate {
    let mut series = 0u64;
    let mut fits = 0u64;
    let mut flops = 0.0;
    let models = cfg.models.len() as u64;
    for &n in &cfg.n {
        let nb = cfg.blocks_for(n).len() as u64;
        let b = cfg.bootstrap_replicates as u64;
        let runs = cfg.reps as u64 * nb;
        let s = cfg.exact_replicates as u64 + cfg.reps as u64;
        let f = runs * (b + 2);
        series += models * s;
        fits += models * f;
        let nf = n as f64;
        // an FFT-sized pass per simulated series, roughly 40 objective sweeps per fit
        flops += models as f64 * (s as f64 * 5.0 * nf * nf.log2() + f as f64 * 40.0 * 20.0 * nf);
    }
    WorkEstimate { simulated_series: series, whittle_fits: fits, flops }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Hybrid,
    Multiplicative,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub model: String,
    pub n: usize,
    pub b: usize,
    pub method: Method,
    pub mean_d1: f64,
    pub se_d1: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOracle {
    pub model: String,
    pub a0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub oracles: Vec<ModelOracle>,
    pub cells: Vec<CellResult>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent seed for a labelled sub-task.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix(seed), |acc, &p| splitmix(acc ^ splitmix(p)))
}

fn model_index(m: SimulationModel) -> u64 {
    SimulationModel::ALL.iter().position(|&x| x == m).unwrap_or(0) as u64
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let k = v.len() as f64;
    let mean = v.iter().sum::<f64>() / k;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0).max(1.0);
    (mean, (var / k).sqrt())
}

/// Asymptotic standard deviation of `sqrt(n) (a_hat - a0)` for the Gaussian
/// AR(1) model, where the fitted family is correctly specified and `V2 = 0`.
pub fn gaussian_asymptotic_sd(a: f64) -> Result<f64> {
    let fam = ArFamily::new(1);
    let theta = [1.0, a];
    let o = oracle_matrices(&fam, &theta, |l| fam.density(&theta, l))?;
    let zero = fdboot_core::linalg::Matrix::zeros(2, 2);
    Ok(asymptotic_covariance(&o.w, &o.v1, &zero)?[(1, 1)].sqrt())
}

/// `d1` of the hybrid and multiplicative draws for one simulated series, per block length.
fn one_repetition(
    model: SimulationModel,
    n: usize,
    blocks: &[usize],
    cfg: &ExperimentConfig,
    exact: &[f64],
    rep: u64,
) -> Result<Vec<(f64, f64)>> {
    let k = model_index(model);
    let mut rng = replicate_rng(derive_seed(cfg.seed, &[k, n as u64, 2]), rep);
    let series = generate(model, n, &mut rng)?;
    let fam = ArFamily::new(1);
    blocks
        .iter()
        .map(|&b| {
            let config = BootstrapConfig::new(cfg.bootstrap_replicates, derive_seed(cfg.seed, &[k, n as u64, b as u64, 3, rep]))
                .with_block(b)
                .with_estimator(Estimator::Innovation);
            let out = HybridSession::prepare(&series, &fam, &config)?.run()?;
            let hybrid = out.distribution.column(1);
            let mult: Vec<f64> = out.distribution.multiplicative.iter().map(|r| r[1]).collect();
            Ok((d1_distance(exact, &hybrid)?, d1_distance(exact, &mult)?))
        })
        .collect()
}

/// Runs every (model, n, b) cell. `progress` receives one line per finished cell.
pub fn run_experiment(cfg: &ExperimentConfig, progress: &(dyn Fn(&str) + Sync)) -> Result<ExperimentResult> {
    cfg.validate()?;
    let models = cfg.parsed_models()?;
    let mut oracles = Vec::new();
    let mut cells = Vec::new();
    for model in models {
        let k = model_index(model);
        let a0 = a0_oracle(model, cfg.a0_length, derive_seed(cfg.seed, &[k, 0]));
        progress(&format!("model {}: a0 = {a0:.5} from a path of length {}", model.tag(), cfg.a0_length));
        oracles.push(ModelOracle { model: model.tag().to_string(), a0 });
        for &n in &cfg.n {
            let exact_seed = derive_seed(cfg.seed, &[k, n as u64, 1]);
            let exact = (0..cfg.exact_replicates as u64)
                .into_par_iter()
                .map(|i| exact_draw(model, n, a0, exact_seed, i))
                .collect::<fdboot_core::Result<Vec<f64>>>()?;
            let blocks = cfg.blocks_for(n);
            let per_rep = (0..cfg.reps as u64)
                .into_par_iter()
                .map(|r| one_repetition(model, n, &blocks, cfg, &exact, r))
                .collect::<Result<Vec<_>>>()?;
            for (bi, &b) in blocks.iter().enumerate() {
                let h: Vec<f64> = per_rep.iter().map(|r| r[bi].0).collect();
                let m: Vec<f64> = per_rep.iter().map(|r| r[bi].1).collect();
                for (method, v) in [(Method::Hybrid, h), (Method::Multiplicative, m)] {
                    let (mean_d1, se_d1) = mean_se(&v);
                    cells.push(CellResult { model: model.tag().to_string(), n, b, method, mean_d1, se_d1, reps: cfg.reps });
                }
                if model == SimulationModel::ModelI {
                    let sd = gaussian_asymptotic_sd(a0)?;
                    let normal = Normal::new(0.0, sd).map_err(|e| CliError::Numeric(e.to_string()))?;
                    let d = d1_to_quantile_function(&exact, |u| normal.inverse_cdf(u), 5)?;
                    // the comparator is a fixed law: one evaluation, no Monte Carlo error
                    cells.push(CellResult {
                        model: model.tag().to_string(),
                        n,
                        b,
                        method: Method::Gaussian,
                        mean_d1: d,
                        se_d1: 0.0,
                        reps: 1,
                    });
                }
                progress(&format!("model {} n = {n} b = {b} done", model.tag()));
            }
        }
    }
    Ok(ExperimentResult { oracles, cells })
}

impl ExperimentResult {
    pub fn cell(&self, model: &str, n: usize, b: usize, method: Method) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.model == model && c.n == n && c.b == b && c.method == method)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.cells {
            w.serialize(c).map_err(|e| CliError::Numeric(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Numeric(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Numeric(e.to_string()))
    }
}

/// One of the qualitative comparisons checked against the results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingClaim {
    pub statement: String,
    pub holds: bool,
    pub detail: String,
}

pub fn pooled_se(a: &CellResult, b: &CellResult) -> f64 {
    (a.se_d1 * a.se_d1 + b.se_d1 * b.se_d1).sqrt()
}

/// Model I: hybrid and multiplicative agree and both beat the Gaussian limit.
/// Models II and III: the hybrid beats the multiplicative bootstrap.
pub fn ordering_claims(result: &ExperimentResult) -> Vec<OrderingClaim> {
    let mut claims = Vec::new();
    for h in result.cells.iter().filter(|c| c.method == Method::Hybrid) {
        let Some(m) = result.cell(&h.model, h.n, h.b, Method::Multiplicative) else { continue };
        let se = pooled_se(h, m);
        let tag = format!("model {} n={} b={}", h.model, h.n, h.b);
        if h.model == "I" {
            let diff = (h.mean_d1 - m.mean_d1).abs();
            claims.push(OrderingClaim {
                statement: format!("{tag}: hybrid and multiplicative d1 within 2 pooled se"),
                holds: diff <= 2.0 * se,
                detail: format!("|{:.4} - {:.4}| = {diff:.4}, pooled se {se:.4}", h.mean_d1, m.mean_d1),
            });
            if let Some(g) = result.cell(&h.model, h.n, h.b, Method::Gaussian) {
                for c in [h, m] {
                    let se = pooled_se(c, g);
                    let gap = g.mean_d1 - c.mean_d1;
                    claims.push(OrderingClaim {
                        statement: format!("{tag}: {:?} d1 below the Gaussian limit by 2 pooled se", c.method),
                        holds: gap >= 2.0 * se,
                        detail: format!("{:.4} vs gaussian {:.4}, pooled se {se:.4}", c.mean_d1, g.mean_d1),
                    });
                }
            }
        } else {
            let gap = m.mean_d1 - h.mean_d1;
            claims.push(OrderingClaim {
                statement: format!("{tag}: hybrid d1 below multiplicative by 2 pooled se"),
                holds: gap >= 2.0 * se,
                detail: format!("{:.4} vs {:.4}, gap {gap:.4}, pooled se {se:.4}", h.mean_d1, m.mean_d1),
            });
        }
    }
    claims
}

pub fn summary_text(result: &ExperimentResult) -> String {
    let mut s = String::new();
    for o in &result.oracles {
        s.push_str(&format!("model {}: a0 = {:.5}\n", o.model, o.a0));
    }
    for c in &result.cells {
        s.push_str(&format!(
            "model {:<3} n={:<6} b={:<4} {:<15} mean d1 {:.4} (se {:.4}, {} reps)\n",
            c.model,
            c.n,
            c.b,
            format!("{:?}", c.method).to_lowercase(),
            c.mean_d1,
            c.se_d1,
            c.reps
        ));
    }
    for c in ordering_claims(result) {
        s.push_str(&format!("[{}] {} ({})\n", if c.holds { "holds" } else { "fails" }, c.statement, c.detail));
    }
    s
}
