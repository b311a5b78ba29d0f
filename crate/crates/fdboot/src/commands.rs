//! The `fit` and `bootstrap` workflows, independent of argument parsing.

use fdboot_core::bootstrap::{data_spectrum, BootstrapConfig, BootstrapOutcome, Variant};
use fdboot_core::family::SpectralFamily;
use fdboot_core::smoothing::cv_spectral_estimate;
use fdboot_core::spectral::{periodogram, TimeSeries};
use fdboot_core::whittle::{fit, Likelihood, Objective};

use crate::error::{CliError, Result};
use crate::parallel::run_session;
use crate::report::{BootstrapReport, FitReport};
use crate::variant::{variant_label, FamilySpec};

fn check_order(series: &TimeSeries, spec: FamilySpec) -> Result<()> {
    if 2 * spec.order >= series.len() {
        return Err(CliError::Input(format!("AR order {} must be below n/2 = {}", spec.order, series.len() / 2)));
    }
    Ok(())
}

/// Whittle fit of the given variant, plus `theta0` from the cross-validated `f_hat`.
pub fn fit_series(series: &TimeSeries, spec: FamilySpec, variant: Variant) -> Result<FitReport> {
    check_order(series, spec)?;
    let family = spec.family();
    let n = series.len();
    let kind = match variant {
        Variant::Debiased => Objective::Debiased,
        _ => Objective::Standard,
    };
    let lik = Likelihood::new(kind, n)?;
    let est = fit(&lik, &family, &data_spectrum(series, variant)?, None)?;
    let f_hat = cv_spectral_estimate(&periodogram(series))?;
    let theta0 = fit(&lik, &family, f_hat.values(), None)?;
    Ok(FitReport {
        n,
        family: spec.to_string(),
        variant: variant_label(&variant),
        parameters: family.parameter_names(),
        sample_mean: series.mean(),
        theta_hat: est.theta,
        objective: est.objective,
        converged: est.converged,
        iterations: est.iterations,
        score_norm: est.score_norm,
        bandwidth: f_hat.bandwidth(),
        theta0: theta0.theta,
    })
}

/// Runs the hybrid bootstrap with replicates spread over the thread pool.
pub fn bootstrap_series(
    series: &TimeSeries,
    spec: FamilySpec,
    config: &BootstrapConfig,
) -> Result<(BootstrapReport, BootstrapOutcome)> {
    check_order(series, spec)?;
    let family = spec.family();
    let session = fdboot_core::bootstrap::HybridSession::prepare(series, &family, config)?;
    let outcome = run_session(&session)?;
    let report = BootstrapReport::new(
        &outcome,
        &family.parameter_names(),
        spec.to_string(),
        variant_label(&config.variant),
        config.seed,
    );
    Ok((report, outcome))
}
