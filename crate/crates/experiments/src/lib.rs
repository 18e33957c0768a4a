//! Configuration-driven experiments on homogenization rates, threshold behavior and the
//! Cauchy problem, with CSV and JSON output.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

use std::path::{Path, PathBuf};

pub use config::ExperimentConfig;
pub use error::{ExperimentError, Result};
pub use output::{Check, Report, Table};
pub use run::Command;

/// Runs `command` on a pool of `threads` workers (0 means the config value, then all cores)
/// and writes its outputs into `out`.
pub fn execute(command: Command, cfg: &ExperimentConfig, threads: usize, out: &Path) -> Result<(Report, Vec<PathBuf>)> {
    let threads = if threads == 0 { cfg.threads } else { threads };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let report = pool.install(|| run::run(command, cfg))?;
    let files = output::emit(out, cfg, pool.current_num_threads(), &report)?;
    Ok((report, files))
}
