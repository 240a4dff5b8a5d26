use serde_json::{json, Value};

/// Exit status for invalid input or failed I/O.
pub const EXIT_ERROR: i32 = 1;
/// Exit status for malformed command lines; matches clap's own.
pub const EXIT_USAGE: i32 = 2;
/// Exit status when a solver runs out of iterations.
pub const EXIT_NONCONVERGENCE: i32 = 3;
/// Exit status when a certificate or threat check fails.
pub const EXIT_REJECTED: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{field}: {message}")]
    Invalid { field: &'static str, message: String },

    #[error("{field}: cannot access {path}: {source}")]
    Io {
        field: &'static str,
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Game(#[from] gcr::Error),
}

impl CliError {
    pub fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        CliError::Invalid {
            field,
            message: message.into(),
        }
    }

    /// The flag, input or environment variable at fault.
    pub fn field(&self) -> &'static str {
        use gcr::Error as E;
        match self {
            CliError::Invalid { field, .. } | CliError::Io { field, .. } => field,
            CliError::Game(e) => match e {
                E::Malformed { .. }
                | E::MissingVertexCount
                | E::VertexOutOfRange { .. }
                | E::SelfLoop { .. }
                | E::DuplicateEdge { .. }
                | E::Disconnected { .. }
                | E::NotATree
                | E::NotAPath
                | E::Precondition(_) => "graph",
                E::InvalidVertex { .. } | E::InvalidState { .. } => "s0",
                E::InvalidToken { .. } => "players",
                E::InvalidPlayer { .. } => "player",
                E::InvalidSpec { field: "tokens", .. } => "players",
                E::InvalidSpec { field, .. } => field,
                E::IllegalAction { .. } | E::StepLimit { .. } => "profile",
                E::StateCapExceeded { .. } => "GCR_STATE_CAP",
                E::NonConvergence { .. } => "max-iters",
                E::NotAPower { .. } => "tol",
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Invalid { .. } => "invalid",
            CliError::Io { .. } => "io",
            CliError::Game(gcr::Error::NonConvergence { .. }) => "non_convergence",
            CliError::Game(_) => "game",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Game(gcr::Error::NonConvergence { .. }) => EXIT_NONCONVERGENCE,
            _ => EXIT_ERROR,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": { "kind": self.kind(), "field": self.field(), "message": self.to_string() } })
    }
}

pub type CliResult<T> = Result<T, CliError>;
