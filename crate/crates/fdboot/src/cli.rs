//! Argument definitions and command dispatch for the `fdboot` binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use fdboot_core::bootstrap::BootstrapConfig;

use crate::commands::{bootstrap_series, fit_series};
use crate::error::{CliError, Result};
use crate::experiment::{estimate_work, ordering_claims, run_experiment, summary_text, ExperimentConfig};
use crate::io::{ensure_dir, read_series, read_table, series_from_values, write_csv, write_text, Column};
use crate::report::to_json;
use crate::sunspot::analyse;
use crate::variant::{FamilySpec, VariantSpec};

#[derive(Debug, Parser)]
#[command(name = "fdboot", version, about = "Whittle estimation and the hybrid frequency-domain bootstrap")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Whittle fit of an AR model.
    Fit(FitArgs),
    /// Hybrid bootstrap distribution and percentile intervals.
    Bootstrap(BootstrapArgs),
    /// Monte Carlo comparison on the simulation models.
    Experiment(ExperimentArgs),
    /// Main periodicity of a yearly series with bootstrap interval.
    Sunspot(SunspotArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Delimited text file, one observation per row.
    #[arg(long)]
    pub input: PathBuf,
    /// Field holding the values: 0-based index or header name.
    #[arg(long, default_value = "0")]
    pub column: String,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "ar:1")]
    pub family: FamilySpec,
    /// standard | tapered:rho | debiased | boundary[:p]
    #[arg(long, default_value = "standard")]
    pub variant: VariantSpec,
    /// Directory for fit.json; printed to stdout only when absent.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "ar:1")]
    pub family: FamilySpec,
    #[arg(long, default_value = "standard")]
    pub variant: VariantSpec,
    /// Bootstrap replicates.
    #[arg(long = "B", default_value_t = 1000)]
    pub replicates: usize,
    /// Subsample length (default round(4 n^0.25)).
    #[arg(long = "b")]
    pub block: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// TOML or JSON configuration; defaults to the desk-scale study.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Replicate counts of the published study (B = 1000, R = 10000, 500 reps).
    #[arg(long)]
    pub full_scale: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SunspotArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Value field; by default the second field when rows have several, else the first.
    #[arg(long)]
    pub column: Option<String>,
    /// Inclusive range of the first field, e.g. 1700:2020.
    #[arg(long)]
    pub years: Option<String>,
    #[arg(long, default_value = "ar:2")]
    pub family: FamilySpec,
    #[arg(long = "B", default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long = "b")]
    pub block: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

fn parse_range(s: &str) -> Result<(f64, f64)> {
    let bad = || CliError::Input(format!("bad range '{s}', expected first:last"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    Ok((lo, hi + 0.999_999))
}

/// Loads the series for `sunspot`: optional year filter on the first field.
pub fn read_sunspot_series(path: &Path, column: Option<&str>, years: Option<&str>) -> Result<fdboot_core::spectral::TimeSeries> {
    let mut table = read_table(path)?;
    if let Some(r) = years {
        let (lo, hi) = parse_range(r)?;
        table = table.filter_first_field(lo, hi)?;
    }
    let column = match column {
        Some(c) => Column::parse(c),
        None if table.rows.first().is_some_and(|(_, f)| f.len() > 1) => Column::Index(1),
        None => Column::Index(0),
    };
    series_from_values(table.column(&column)?, path)
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(a) => {
            let series = read_series(&a.input.input, &Column::parse(&a.input.column))?;
            let variant = a.variant.resolve(&series)?;
            let json = to_json(&fit_series(&series, a.family, variant)?)?;
            if let Some(dir) = a.out_dir {
                ensure_dir(&dir)?;
                write_text(&dir.join("fit.json"), &json)?;
            }
            println!("{json}");
        }
        Command::Bootstrap(a) => {
            let series = read_series(&a.input.input, &Column::parse(&a.input.column))?;
            let mut config = BootstrapConfig::new(a.replicates, a.seed).with_variant(a.variant.resolve(&series)?);
            config.block = a.block;
            let (report, outcome) = bootstrap_series(&series, a.family, &config)?;
            ensure_dir(&a.out_dir)?;
            let json = to_json(&report)?;
            write_text(&a.out_dir.join("bootstrap.json"), &json)?;
            let names = a.family.family_names();
            let mut header: Vec<String> = names.iter().map(|p| format!("l_{p}")).collect();
            header.extend(names.iter().map(|p| format!("mult_{p}")));
            let rows: Vec<Vec<f64>> = outcome
                .distribution
                .samples
                .iter()
                .zip(&outcome.distribution.multiplicative)
                .map(|(l, m)| l.iter().chain(m).copied().collect())
                .collect();
            write_csv(&a.out_dir.join("samples.csv"), &header, &rows)?;
            println!("{json}");
        }
        Command::Experiment(a) => {
            let mut cfg = match &a.config {
                Some(p) => ExperimentConfig::load(p)?,
                None => ExperimentConfig::default(),
            };
            if a.full_scale {
                cfg = cfg.full_scale();
            }
            if let Some(s) = a.seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            let w = estimate_work(&cfg);
            eprintln!(
                "estimated work: {} simulated series, {} Whittle fits, ~{:.1e} flops",
                w.simulated_series, w.whittle_fits, w.flops
            );
            let result = run_experiment(&cfg, &|line| eprintln!("{line}"))?;
            ensure_dir(&a.out_dir)?;
            write_text(&a.out_dir.join("experiment.csv"), &result.to_csv()?)?;
            write_text(&a.out_dir.join("experiment.json"), &to_json(&result)?)?;
            write_text(&a.out_dir.join("claims.json"), &to_json(&ordering_claims(&result))?)?;
            print!("{}", summary_text(&result));
        }
        Command::Sunspot(a) => {
            let series = read_sunspot_series(&a.input, a.column.as_deref(), a.years.as_deref())?;
            let analysis = analyse(&series, a.family.order, a.replicates, a.block, a.seed)?;
            ensure_dir(&a.out_dir)?;
            let json = to_json(&analysis)?;
            write_text(&a.out_dir.join("sunspot.json"), &json)?;
            let rows: Vec<Vec<f64>> = analysis
                .replicate_frequencies
                .iter()
                .zip(&analysis.replicate_periods)
                .map(|(l, p)| vec![*l, *p])
                .collect();
            write_csv(&a.out_dir.join("sunspot_replicates.csv"), &["frequency".into(), "period".into()], &rows)?;
            println!(
                "n = {}, raw periodogram period {:.3}, AR({}) period {:.3}, 95% interval [{:.2}, {:.2}] ({} edge, {} non-causal replicates)",
                analysis.n,
                analysis.raw_peak.period,
                analysis.order,
                analysis.peak.period,
                analysis.period_ci95[0],
                analysis.period_ci95[1],
                analysis.edge_replicates,
                analysis.noncausal_replicates
            );
        }
    }
    Ok(())
}

impl FamilySpec {
    fn family_names(&self) -> Vec<String> {
        use fdboot_core::family::SpectralFamily;
        self.family().parameter_names()
    }
}
