use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] ftqc_core::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) => core_exit_code(e),
            _ => EXIT_OTHER,
        }
    }
}

pub fn core_exit_code(e: &ftqc_core::Error) -> i32 {
    use ftqc_core::Error as E;
    match e {
        E::InvalidInput { .. } => EXIT_USAGE,
        E::Convergence { .. } | E::Infeasible { .. } => EXIT_INFEASIBLE,
        E::ResourceLimit { .. } => EXIT_RESOURCE,
        E::Cache { .. } | E::Io(_) => EXIT_OTHER,
    }
}
