//! Exact and floating Dunkl calculus on polynomials over root systems.

pub mod calculus;
pub mod drift;
pub mod error;
pub mod identities;
pub mod linalg;
pub mod observable;
pub mod poly;
pub mod probes;
pub mod quadrature;
pub mod root_system;
pub mod scalar;

pub use drift::{DriftBounds, DriftSpec};
pub use error::{CoreError, Result};
pub use poly::{parse_poly, MultiPoly};
pub use root_system::{Family, GroupTable, RootSystem};
pub use scalar::{parse_rational, ratio, Rational, Scalar};

/// Crate version, embedded in experiment summaries.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
