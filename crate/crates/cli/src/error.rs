use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error(transparent)]
    Numerics(#[from] ttedopa::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 3 for failures of the numerics, 2 for everything the user can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerics(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }

    /// Machine-readable summary for manifests.
    pub fn record(&self) -> serde_json::Value {
        let kind = match self.exit_code() {
            3 => "numerical",
            _ => "validation",
        };
        serde_json::json!({ "kind": kind, "message": self.to_string() })
    }
}
