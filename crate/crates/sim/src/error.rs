use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Core(#[from] dunkl_core::CoreError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("hypothesis audit failed: {condition} at {witness:?} (value {value})")]
    Audit { condition: String, witness: Vec<f64>, value: f64 },
    #[error("window too small: need radius {required}, got {got}")]
    WindowTooSmall { required: i64, got: i64 },
}

pub type Result<T> = std::result::Result<T, SimError>;
