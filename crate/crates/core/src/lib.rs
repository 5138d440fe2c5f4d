//! Discrete exponential families as computable geometric objects.
//!
//! A model is a finite sample space together with an integer matrix of
//! sufficient statistics and a base measure. Everything else is derived from
//! that single description:
//!
//! | Module | Computes |
//! |--------|----------|
//! | [`model`] | log-partition, probabilities, mean parameters, monomial parametrization |
//! | [`geometry`] | Fisher metric, Amari–Chentsov tensor, α-Christoffels, curvature |
//! | [`frobenius`] | multiplication on tangent spaces and the Frobenius-axiom residuals |
//! | [`toric`] | extended design matrix, integer kernel lattice, binomial relations |
//! | [`webs`] | barycentric fields, Ceva relations, hexagon closure, web curvature, sphere embedding |
//! | [`split_algebra`] | rank-2 split algebra, Cauchy–Riemann residuals, subweb decomposition |
//! | [`cli`] | the `statfrob` command line |
//!
//! All numerical routines are pure functions of their inputs.

use thiserror::Error;

pub mod cli;
pub mod frobenius;
pub mod geometry;
pub mod intlin;
pub mod model;
pub mod numdiff;
pub mod split_algebra;
pub mod tensor;
pub mod toric;
pub mod webs;

pub use model::{CanonicalPoint, ExponentialFamilyModel, ProbabilityVector};

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed model file: {0}")]
    MalformedModel(String),

    #[error("non-positive base measure: entry {index} is {value}")]
    NonPositiveBaseMeasure { index: usize, value: f64 },

    #[error("sample space too small: m = {0}, need m >= 2")]
    TooFewOutcomes(usize),

    #[error("non-integer Q entry at row {row}, column {col}: {value}")]
    NonIntegerEntry {
        row: usize,
        col: usize,
        value: String,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate: {0}")]
    NonFinite(f64),

    #[error("singular metric: condition number {condition:e} exceeds cap {cap:e}")]
    SingularMetric { condition: f64, cap: f64 },

    #[error("relation is not in the kernel of the extended matrix: {0:?}")]
    NotInKernel(Vec<i64>),

    #[error("point does not lie on the simplex: coordinate sum {0}")]
    NotOnSimplex(f64),

    #[error("conditional undefined on boundary: coordinate {index} is {value}")]
    BoundaryPoint { index: usize, value: f64 },

    #[error("degenerate ratio: {0}")]
    DegenerateRatio(String),

    #[error("point is not on its side: distance {0:e}")]
    OffSide(f64),

    #[error("vanishing partial derivative of web function at ({x}, {y})")]
    VanishingPartial { x: f64, y: f64 },

    #[error("point ({x}, {y}) is outside the domain box")]
    OutsideDomain { x: f64, y: f64 },

    #[error("leaf exits domain while solving for {0}")]
    LeafExitsDomain(&'static str),

    #[error("non-monotone leaf crossing while solving for {0}")]
    NonMonotoneLeaf(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
