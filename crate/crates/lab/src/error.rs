use dunkl_core::CoreError;
use dunkl_sim::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("{0}")]
    Audit(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("computation failed: {0}")]
    Runtime(String),
}

impl LabError {
    /// Process exit code: 2 for schema violations, 3 for failed audits.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Schema(_) => 2,
            LabError::Audit(_) => 3,
            LabError::Io(_) | LabError::Runtime(_) => 4,
        }
    }
}

impl From<CoreError> for LabError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Audit { .. } => LabError::Audit(e.to_string()),
            CoreError::Quadrature(_) | CoreError::NotDivisible { .. } | CoreError::GroupTooLarge { .. } => LabError::Runtime(e.to_string()),
            _ => LabError::Schema(e.to_string()),
        }
    }
}

impl From<SimError> for LabError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Core(c) => c.into(),
            SimError::Audit { .. } => LabError::Audit(e.to_string()),
            SimError::Config(_) | SimError::WindowTooSmall { .. } => LabError::Schema(e.to_string()),
        }
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
