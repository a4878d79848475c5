//! Exact arithmetic for rational 2-planes in Z⁴ and their spherical shadows.
//!
//! A rational plane L ⊂ Q⁴ corresponds, through quaternion multiplication,
//! to a pair of integer points (a₁, a₂) of equal norm on a sphere; the norm
//! is the discriminant of the lattice L ∩ Z⁴.  From one plane the crate
//! derives four positive-definite binary forms (the plane, its orthogonal
//! complement, and the two orthogonal lattices aᵢ⊥ ∩ Z³), their CM points
//! on the modular surface, and the glue group of the plane lattice.  On top
//! of that sit exact counting identities and equidistribution diagnostics.
//!
//! All lattice-level arithmetic is exact (arbitrary-precision integers and
//! rationals); floating point appears only in the statistics layer and in
//! one numeric stabilizer check.

pub mod counting;
pub mod forms_cm;
pub mod glue;
pub mod klein;
pub mod planes;
pub mod quat_core;
pub mod stats;

pub mod acceptance;

use num_bigint::BigInt;

/// Exact integer scalar used by the public API.
pub type Int = BigInt;
/// Exact rational scalar (glue-group fractional forms).
pub type Rat = num_rational::Ratio<BigInt>;

/// Quaternion over the exact integer scalar.
pub type Quaternion = quat_core::Quat<Int>;
/// Traceless quaternion (integer 3-vector) over the exact scalar.
pub type PureVec3 = quat_core::PureVec<Int>;
/// Quaternion over machine floats, for the numeric twist check only.
pub type QuatF64 = quat_core::Quat<f64>;
/// Integer matrix over the exact scalar.
pub type IntMatrix = quat_core::Mat<Int>;

/// Errors surfaced by the exact core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("twist residual {residual:e} exceeds tolerance on plane with basis rows {plane}")]
    TwistExceedsTol { plane: String, residual: f64 },
    #[error("undefined content: zero vector")]
    ZeroVector,
    #[error("norms differ: {0} vs {1}")]
    UnequalNorms(String, String),
    #[error("pair is not pair-primitive")]
    NotPairPrimitive,
    #[error("vectors are not congruent mod 2")]
    ParityMismatch,
    #[error("span inputs are linearly dependent")]
    DependentSpan,
    #[error("form is not positive definite")]
    NotPositiveDefinite,
    #[error("form is imprimitive where a primitive form is required")]
    ImprimitiveForm,
    #[error("discriminant mismatch: {0} vs {1}")]
    DiscMismatch(String, String),
    #[error("{0} is not a valid negative discriminant (need < 0 and ≡ 0,1 mod 4)")]
    InvalidDiscriminant(String),
    #[error("coherence test undefined for this D: {0}")]
    CoherenceUndefined(String),
    #[error("matrix is not symmetric or not integral")]
    BadGram,
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

pub type Result<T> = std::result::Result<T, Error>;
