use thiserror::Error;

pub type Result<T> = std::result::Result<T, ThermoError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermoError {
    #[error("matrix is not Hermitian (relative defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("non-finite {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Gibbs exponent out of range: beta*||H|| = {0:.3e} exceeds 700")]
    GibbsOverflow(f64),

    #[error("orthogonal postselection: postselection probability {0:.3e} vanishes")]
    OrthogonalPostselection(f64),

    #[error("insensitive postselection: inversion denominator {denominator:.3e} is below {tolerance:.3e} (postselection is an S_z eigenstate or has no temperature sensitivity)")]
    InsensitivePostselection { denominator: f64, tolerance: f64 },

    #[error("zero denominator in the symmetric-x inversion (omega_R + 3 omega_z = 0)")]
    SymmetricDenominator,

    #[error("truncation insufficient: population {leakage:.3e} in the top two Fock levels exceeds 1e-8")]
    TruncationInsufficient { leakage: f64 },

    #[error("weak-value reconstruction did not converge in {0} iterations")]
    NoConvergence(usize),

    #[error("insufficient precision in finite-difference QFI: {0}")]
    InsufficientPrecision(String),
}
