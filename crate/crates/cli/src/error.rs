use std::path::PathBuf;

use binmed::MediationError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] MediationError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Degenerate(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Self::Json { context: context.into(), source }
    }

    /// Short category printed in the error line.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Model(e) => match e {
                MediationError::Schema(_) | MediationError::Dimension(_) | MediationError::InvalidArgument(_) => "schema",
                MediationError::NonConvergence { .. } => "nonconvergence",
                MediationError::Separation { .. } => "separation",
                MediationError::Singular { .. } => "singular",
                MediationError::Overflow { .. }
                | MediationError::NonFinite { .. }
                | MediationError::DegenerateProbability { .. }
                | MediationError::NegativeVariance { .. } => "numerical",
            },
            CliError::Io { .. } => "io",
            CliError::Csv(_) | CliError::Json { .. } | CliError::Usage(_) => "schema",
            CliError::Degenerate(_) => "numerical",
            CliError::Verification(_) => "verification",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "nonconvergence" | "separation" | "singular" => 3,
            "numerical" => 4,
            "verification" => 5,
            _ => 2,
        }
    }

    /// One line, `ERROR <category>: <message>`.
    pub fn line(&self) -> String {
        let full = self.to_string().replace('\n', " ");
        let msg = full.strip_prefix("schema error: ").unwrap_or(&full);
        format!("ERROR {}: {msg}", self.category())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
