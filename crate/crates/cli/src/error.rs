use std::fmt;

/// Failures surfaced by the command-line tool, each with a stable exit code.
#[derive(Debug)]
pub enum CliError {
    Core(psp_core::Error),
    Config(String),
    Io(String),
    /// An emitted file did not survive its own re-parse.
    Validation(String),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.category(),
            CliError::Config(_) => "invalid-parameter",
            CliError::Io(_) | CliError::Validation(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "invalid-parameter" => 2,
            "io" => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config(m) => write!(f, "configuration: {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
            CliError::Validation(m) => write!(f, "output validation: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<psp_core::Error> for CliError {
    fn from(e: psp_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
