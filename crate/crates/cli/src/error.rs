use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] slsm_core::Error),

    /// The fit stopped without converging; its report was still written.
    #[error("fit did not converge (report written)")]
    NotConverged,
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// 0 ok, 2 usage or input, 3 non-convergence, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::NotConverged => 3,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

pub fn core_exit_code(error: &slsm_core::Error) -> i32 {
    use slsm_core::Error::*;
    match error.root() {
        InvalidParameter { .. } | Domain(_) | Contract(_) | StepTooLarge { .. } => 2,
        NonConvergence(_) => 3,
        DegenerateScale | SamplerFailure { .. } | Singular(_) | Numeric(_) => 4,
        Stage { .. } => unreachable!("root() strips stage tags"),
    }
}
