use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config field `{field}`: {message}")]
    Config { field: String, line: Option<usize>, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] irs_stealth::Error),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config { field: field.to_string(), line: None, message: message.into() }
    }

    /// Locates a TOML error: 1-based line, and `section.key` when the offending line holds a key.
    pub(crate) fn from_toml(err: &toml::de::Error, text: &str) -> Self {
        let message = err.message().trim().to_string();
        let Some(span) = err.span() else {
            return CliError::Config { field: String::new(), line: None, message };
        };
        let start = span.start.min(text.len());
        let line_no = text[..start].matches('\n').count() + 1;
        let line_text = text.lines().nth(line_no - 1).unwrap_or("");
        let key = line_text
            .split_once('=')
            .map(|(k, _)| k.trim().trim_matches('"').to_string())
            .filter(|k| !k.is_empty() && !k.starts_with('['));
        let section = text
            .lines()
            .take(line_no)
            .filter_map(|l| {
                let l = l.trim();
                (l.starts_with('[') && l.ends_with(']'))
                    .then(|| l.trim_matches(|c| c == '[' || c == ']').trim().to_string())
            })
            .last();
        let field = match (section, key) {
            (Some(s), Some(k)) => format!("{s}.{k}"),
            (None, Some(k)) => k,
            (Some(s), None) => s,
            (None, None) => String::new(),
        };
        CliError::Config { field, line: Some(line_no), message }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
            CliError::Solver(_) => "solver",
            CliError::Internal(_) => "internal",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config { .. } => 3,
            CliError::Io { .. } => 4,
            CliError::Solver(_) => 5,
            CliError::Internal(_) => 70,
        }
    }

    /// Single-line JSON for stderr.
    pub fn to_json(&self) -> String {
        let mut body = json!({ "kind": self.kind(), "message": self.to_string() });
        match self {
            CliError::Config { field, line, message } => {
                body["field"] = json!(field);
                body["line"] = json!(line);
                body["message"] = json!(message);
            }
            CliError::Io { path, .. } => body["path"] = json!(path),
            CliError::Solver(e) => body["variant"] = json!(solver_variant(e)),
            _ => {}
        }
        json!({ "error": body }).to_string()
    }
}

fn solver_variant(e: &irs_stealth::Error) -> &'static str {
    use irs_stealth::Error::*;
    match e {
        InvalidArgument(_) => "invalid_argument",
        DegenerateGeometry(_) => "degenerate_geometry",
        DimensionMismatch { .. } => "dimension_mismatch",
        Singular(_) => "singular",
        Infeasible { .. } => "infeasible",
        Unbounded => "unbounded",
        NonConvergence { .. } => "non_convergence",
    }
}
