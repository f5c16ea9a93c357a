//! Exact coefficient extraction for the Dyson and q-Dyson constant-term
//! products, closed-form evaluators for their first few non-constant
//! coefficients, and an exponent-fitting engine that recovers the
//! piecewise-linear q-power exponents from extracted data.
//!
//! Everything is exact: coefficients are arbitrary-precision integers and
//! every linear solve runs over the rationals.

pub mod closedform;
pub mod dyson;
pub mod error;
pub mod fitting;
pub mod laurent;
pub mod linform;
pub mod qpoly;
pub mod verify;

pub use closedform::{IndexPattern, PatternKind, StembridgeReading, StembridgeSpec};
pub use dyson::{DysonSpec, Limits, Mode};
pub use error::{Error, ErrorKind, Result};
pub use fitting::{FitResult, SamplePlan, Skeleton};
pub use laurent::{BinomialFactor, ExponentVector, LaurentPoly};
pub use linform::LinearForm;
pub use qpoly::{QFactorization, QPoly};
pub use verify::{GridSpec, VerifyReport, VerifyTarget};

/// Version string recorded in run records.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
