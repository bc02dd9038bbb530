use thiserror::Error;

/// Pipeline stage that produced an error. Used to label messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Gates,
    Net,
    Synthesis,
    Trotter,
    Simulation,
    Surface,
    Concat,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::Gates => "gates",
            Stage::Net => "net",
            Stage::Synthesis => "synthesis",
            Stage::Trotter => "trotter",
            Stage::Simulation => "simulation",
            Stage::Surface => "surface",
            Stage::Concat => "concat",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("[{stage}] invalid input: {msg}")]
    InvalidInput { stage: Stage, msg: String },

    #[error("[{stage}] resource limit `{limit}` exceeded: {msg}")]
    ResourceLimit {
        stage: Stage,
        limit: &'static str,
        msg: String,
    },

    #[error("[{stage}] did not converge: {msg}")]
    Convergence { stage: Stage, msg: String },

    #[error("[{stage}] infeasible: {msg}")]
    Infeasible { stage: Stage, msg: String },

    #[error("[{stage}] net cache `{path}`: {msg}")]
    Cache {
        stage: Stage,
        path: String,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(stage: Stage, msg: impl Into<String>) -> Self {
        Error::InvalidInput {
            stage,
            msg: msg.into(),
        }
    }

    pub(crate) fn limit(stage: Stage, limit: &'static str, msg: impl Into<String>) -> Self {
        Error::ResourceLimit {
            stage,
            limit,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
