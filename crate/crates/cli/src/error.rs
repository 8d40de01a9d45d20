use std::fmt;

use hardy_core::HardyError;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or output location.
    Usage(String),
    Core(HardyError),
    /// At least one suite ran to completion and failed.
    SuiteFailure(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
            CliError::SuiteFailure(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::SuiteFailure(s) => write!(f, "suites failed: {}", s.join(", ")),
        }
    }
}

impl From<HardyError> for CliError {
    fn from(e: HardyError) -> Self {
        CliError::Core(e)
    }
}
