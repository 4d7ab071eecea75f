//! Configuration, orchestration and reporting for boxtorus runs.
//!
//! Compute lives in `boxtorus-core`; this crate owns every file it touches.

pub mod artifacts;
pub mod config;
pub mod report;
pub mod run;

pub use artifacts::{Manifest, RunDir, Status};
pub use config::{ConfigError, Mode, RunConfig};
pub use report::report_summary;
pub use run::{run, Exit};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "BOXTORUS_THREADS";

/// Sizes the global worker pool from `BOXTORUS_THREADS`, if set.
pub fn configure_threads() -> anyhow::Result<Option<usize>> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| anyhow::anyhow!("{THREADS_ENV} must be a positive integer, got `{raw}`"))?;
    anyhow::ensure!(n > 0, "{THREADS_ENV} must be a positive integer, got `{raw}`");
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(Some(n))
}
