//! Configuration-driven front end for the `hb-core` analyses.
//!
//! A JSON [`RunConfig`] names a model, a task and its options; [`execute`]
//! turns it into CSV/JSON artifacts whose bytes depend only on the
//! configuration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod config;
pub mod format;
pub mod run;

use std::path::{Path, PathBuf};

pub use config::{emit_config, parse_config, ConfigError, ConfigIssue, RunConfig, Task};
pub use run::{execute, write_artifacts, Artifact, CliError, Outcome};

/// Command-line settings layered over a configuration file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub parallel: Option<usize>,
    pub seed: Option<u64>,
    pub tol_im: Option<f64>,
    pub max_sweeps: Option<usize>,
    pub no_balance: bool,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(out) = &self.out {
            config.output.dir = out.to_string_lossy().into_owned();
        }
        if let Some(seed) = self.seed {
            config.solver.seed = seed;
        }
        if let Some(t) = self.tol_im {
            config.solver.tol_im = t;
        }
        if let Some(n) = self.max_sweeps {
            config.solver.max_sweeps = n;
        }
        if self.no_balance {
            config.solver.balance = false;
        }
    }
}

/// Loads `path`, applies `overrides`, runs `task` (the configured one when
/// `None`) and writes the artifacts.
pub fn run_file(path: &Path, task: Option<Task>, overrides: &Overrides) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut config = parse_config(&text)?;
    overrides.apply(&mut config);
    let issues = config::validate(&config);
    if !issues.is_empty() {
        return Err(ConfigError { issues }.into());
    }
    let task = task.unwrap_or(config.task);
    let outcome = execute(&config, task, overrides.parallel.unwrap_or(1))?;
    write_artifacts(Path::new(&config.output.dir), &outcome.artifacts)?;
    match outcome.failure {
        Some(msg) => Err(CliError::Failed(msg)),
        None => Ok(()),
    }
}
