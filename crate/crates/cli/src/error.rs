use std::fmt;

/// A failed run, classified by the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file or matrix (exit 4).
    Config(String),
    /// The requested projector state is zero (exit 2).
    Vanishing(String),
    /// A checked invariant did not hold (exit 3).
    Invariant(String),
    /// Anything else, mostly I/O (exit 1).
    Other(String),
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_OTHER: u8 = 1;
pub const EXIT_VANISHING: u8 = 2;
pub const EXIT_INVARIANT: u8 = 3;
pub const EXIT_CONFIG: u8 = 4;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Vanishing(_) => EXIT_VANISHING,
            CliError::Invariant(_) => EXIT_INVARIANT,
            CliError::Other(_) => EXIT_OTHER,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Vanishing(m) => write!(f, "vanishing state: {m}"),
            CliError::Invariant(m) => write!(f, "invariant failure: {m}"),
            CliError::Other(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<catmap::Error> for CliError {
    fn from(e: catmap::Error) -> Self {
        use catmap::Error as E;
        let msg = e.to_string();
        match e {
            E::ConditionViolation(_) | E::InvalidInput(_) | E::TooLarge { .. } => CliError::Config(msg),
            E::VanishingState { .. } => CliError::Vanishing(msg),
            E::UnitarityFailure { .. }
            | E::NotScalar { .. }
            | E::StructureViolation { .. }
            | E::BranchMismatch { .. } => CliError::Invariant(msg),
            E::NoOrderFound { .. } | E::Degenerate(_) | E::Io(_) | E::Json(_) => CliError::Other(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
