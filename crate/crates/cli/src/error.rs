use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at {pointer:?}: {message}")]
    Config { pointer: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] smallball::Error),

    #[error("{0}")]
    Usage(String),
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    kind: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pointer: Option<&'a str>,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Io { .. } => "io",
            CliError::Core(smallball::Error::Infeasible(_)) => "infeasible",
            CliError::Core(_) => "computation",
            CliError::Usage(_) => "usage",
        }
    }

    /// `{"error": {...}}` for stderr.
    pub fn to_json(&self) -> String {
        let pointer = match self {
            CliError::Config { pointer, .. } => Some(pointer.as_str()),
            _ => None,
        };
        let message = match self {
            CliError::Config { message, .. } => message.clone(),
            other => other.to_string(),
        };
        let report = ErrorReport {
            kind: self.kind(),
            message,
            pointer,
        };
        serde_json::json!({ "error": report }).to_string()
    }
}
