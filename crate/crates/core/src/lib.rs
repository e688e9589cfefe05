//! Numerics for entropic uncertainty relations in quantum mechanics with a
//! minimal observable length.
//!
//! The deformed commutator `[x, k] = i(1 + beta k^2)` is represented through an
//! auxiliary wavenumber `q` on `(-q0, q0)` with `k = tan(sqrt(beta) q)/sqrt(beta)`.
//! States live in `q`-space; the crate builds the position density `w(x)`, the
//! auxiliary density `v(q)` and the physical wavenumber density `u(k)`, smears
//! them with acceptance functions, bins them, and evaluates both sides of the
//! Shannon, Rényi and Tsallis uncertainty relations with signed margins.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod entropy;
pub mod grid;
pub mod measurement;
pub mod params;
pub mod quad;
pub mod relations;
pub mod special;
pub mod state;
pub mod tail;
pub mod transform;

pub use density::{DensityFn, Integrand};
pub use entropy::{DiscreteDist, EntropyKind, EntropyValue};
pub use grid::{Domain, Grid, Integral};
pub use measurement::AcceptanceFn;
pub use params::{make_params, MinLengthParams, OrderPair};
pub use relations::{RelationId, RelationReport, Verdict};
pub use state::{catalog_state, normalize, CatalogName, MixedState, PureState};
pub use transform::RepresentationBundle;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("state has zero norm")]
    DegenerateState,
    #[error("unknown state name `{0}`")]
    UnknownState(String),
    #[error("q = {q} lies outside (-q0, q0) with q0 = {q0}")]
    Domain { q: f64, q0: f64 },
    #[error("moment of order {order} diverges (partial value {partial})")]
    MomentDivergence { order: u32, partial: f64 },
    #[error("integral of {what} diverges (partial value {partial})")]
    Divergence { what: String, partial: f64 },
    #[error("resolution budget exhausted: {0}")]
    Resolution(String),
    #[error("density is not normalized: mass {mass}")]
    NotNormalized { mass: f64 },
    #[error("orders alpha = {alpha}, gamma = {gamma} are not conjugate")]
    NonConjugate { alpha: f64, gamma: f64 },
    #[error("invalid binning: {0}")]
    Binning(String),
    #[error("output grid too narrow: mass defect {0:e}")]
    MassLoss(f64),
    #[error("sampling failed: {0}")]
    Sampling(String),
}

pub type Result<T> = std::result::Result<T, Error>;
