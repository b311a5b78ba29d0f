//! Replicates on the rayon pool. Each replicate owns its random stream, so
//! the outcome does not depend on scheduling.

use rayon::prelude::*;

use fdboot_core::bootstrap::{BootstrapConfig, BootstrapOutcome, HybridSession};
use fdboot_core::family::SpectralFamily;
use fdboot_core::spectral::TimeSeries;

pub fn run_session(session: &HybridSession<'_>) -> fdboot_core::Result<BootstrapOutcome> {
    let draws = (0..session.config().replicates)
        .into_par_iter()
        .map(|i| session.replicate(i))
        .collect::<fdboot_core::Result<Vec<_>>>()?;
    session.finish(draws)
}

pub fn run_hybrid_bootstrap_parallel(
    series: &TimeSeries,
    family: &dyn SpectralFamily,
    config: &BootstrapConfig,
) -> fdboot_core::Result<BootstrapOutcome> {
    run_session(&HybridSession::prepare(series, family, config)?)
}
