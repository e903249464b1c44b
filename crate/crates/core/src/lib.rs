//! Sparse pseudospectral polynomial approximation of black-box functions.
//!
//! This crate builds orthonormal polynomial expansions of multivariate
//! functions from point evaluations on sparse (Smolyak) grids. The central
//! construction combines full-tensor pseudospectral operators over an
//! admissible multi-index set so that the result has no internal aliasing:
//! every basis term inside the approximation range is recovered exactly when
//! the input is itself a polynomial in that range. The conventional
//! alternative, estimating every coefficient with one fixed sparse quadrature
//! rule ("direct quadrature"), is also provided as a baseline because it
//! demonstrates the O(1) aliasing errors the Smolyak construction avoids.
//!
//! The main pieces:
//!
//! - [`basis`]: orthonormal Legendre and (probabilists') Hermite families via
//!   three-term recurrences.
//! - [`quadrature`]: one-dimensional rule families with growth/exactness
//!   metadata (linear and exponential Gauss, Clenshaw-Curtis, Gauss-Patterson)
//!   plus tensor-product rules.
//! - [`multiindex`]: admissible index sets, neighborhoods, and integer
//!   combination coefficients.
//! - [`expansion`]: sparse coefficient storage, evaluation, norms, and Monte
//!   Carlo error estimation.
//! - [`tensorop`] / [`smolyak`]: the full-tensor and sparse pseudospectral
//!   operators, sparse quadrature, the direct-quadrature baseline, and
//!   aliasing diagnostics.
//! - [`adaptive`]: greedy dimension-adaptive refinement with local and global
//!   error indicators.
//! - [`genz`]: the six Genz test functions.
//! - [`evalcache`]: a deduplicating evaluation store shared by all operators;
//!   its miss counter is the unit of work accounting.

pub mod adaptive;
pub mod basis;
pub mod error;
pub mod evalcache;
pub mod expansion;
pub mod fmt;
pub mod genz;
pub mod model;
pub mod multiindex;
pub mod quadrature;
pub mod smolyak;
pub mod tensorop;

pub use adaptive::{run_adaptive, AdaptiveRun, IndicatorVariant, TerminationPolicy};
pub use basis::PolynomialFamily;
pub use error::CoreError;
pub use evalcache::EvalCache;
pub use expansion::PolynomialExpansion;
pub use genz::{GenzInstance, GenzKind};
pub use model::ModelFunction;
pub use multiindex::{MultiIndex, MultiIndexSet};
pub use quadrature::{QuadratureFamily, QuadratureKind, QuadratureRule1D, TensorQuadratureRule};
pub use smolyak::SmolyakSpec;
pub use tensorop::TensorPseudospectralSpec;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;
