use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model or run parameter lies outside its admissible range.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("initial spinor is not normalised (norm² = {norm_sqr})")]
    NonUnitSpinor { norm_sqr: f64 },

    /// `1 − τ² ≈ 0`: the two Bloch eigenvalues coincide and the group
    /// velocity is undefined.
    #[error("eigenvalues degenerate at k = ({k1}, {k2})")]
    Degenerate { k1: f64, k2: f64 },

    /// The velocity point is on the boundary of, or outside, the support.
    #[error("v = ({v1}, {v2}) is not strictly inside the support")]
    OutsideSupport { v1: f64, v2: f64 },

    /// The requested branch has no preimage for this velocity.
    #[error("branch {0} has no preimage here")]
    NoPreimage(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
