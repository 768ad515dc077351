use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NonHermitian { residual: f64 },
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("matrix is numerically singular (smallest singular value {sigma_min:.3e})")]
    NearSingular { sigma_min: f64 },
    #[error("spectral gap too small: {gap:.3e}")]
    GapTooSmall { gap: f64 },
    #[error("matrix is not skew-symmetric (residual {residual:.3e})")]
    NotSkew { residual: f64 },
    #[error("matrix has non-real entries (largest imaginary part {residual:.3e})")]
    NotReal { residual: f64 },
    #[error("odd matrix dimension {size}")]
    OddDimension { size: usize },
    #[error("matrix of size {size} exceeds the combinatorial limit {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },
    #[error("dimension {size} is not a multiple of {multiple}")]
    BadDimension { size: usize, multiple: usize },
    #[error("matrix is not unitary (defect {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("relation residual {delta:.3e} exceeds limit {limit:.3e}")]
    ResidualTooLarge { delta: f64, limit: f64 },
    #[error("matrices are not self-dual (residual {residual:.3e})")]
    NotSelfDual { residual: f64 },
    #[error(
        "conjugated Bott matrix is not purely imaginary skew-symmetric (residual {residual:.3e})"
    )]
    NotSkewAfterPhi { residual: f64 },
    #[error("matrix is not an orthogonal projection (residual {residual:.3e})")]
    NotProjection { residual: f64 },
    #[error("commutator with the projection {delta:.3e} exceeds limit {limit:.3e}")]
    CommutatorTooLarge { delta: f64, limit: f64 },
    #[error("could not build a structured isometry onto the range of the projection")]
    PairingFailure,
    #[error("matrix lacks the required symmetry (residual {residual:.3e})")]
    WrongSymmetry { residual: f64 },
    #[error("failed to pair eigenvectors across the spectrum")]
    DegenerateFailure,
    #[error("norm condition ||S^2 - I|| < 1 fails (value {defect:.3e})")]
    NormConditionFailed { defect: f64 },
    #[error("nontrivial K2 class (Pfaffian {pfaffian:.3e})")]
    NontrivialClass { pfaffian: f64 },
    #[error("skew canonical form is rank deficient (|a| = {value:.3e})")]
    RankDeficient { value: f64 },
    #[error("could not perturb the witness blocks to invertible ones")]
    PerturbationFailed,
    #[error("hypothesis fails (residual {residual:.3e})")]
    HypothesisFailed { residual: f64 },
    #[error("basis is not orthonormal (residual {residual:.3e})")]
    NotOrthonormal { residual: f64 },
    #[error("position set has norm {norm:.3e} > 1")]
    NormTooLarge { norm: f64 },
    #[error("positions are not an exact torus representation (delta {delta:.3e})")]
    NotExactRepresentation { delta: f64 },
    #[error("matrices do not commute (residual {residual:.3e})")]
    NotCommuting { residual: f64 },
    #[error("Fermi level lies in the spectrum (distance {distance:.3e})")]
    NoGap { distance: f64 },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Obstructions are mathematical outcomes rather than bad input.
    pub fn is_obstruction(&self) -> bool {
        matches!(
            self,
            Error::GapTooSmall { .. } | Error::NontrivialClass { .. }
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            Error::NonHermitian { .. } => "NonHermitian",
            Error::NoConvergence => "NoConvergence",
            Error::NearSingular { .. } => "NearSingular",
            Error::GapTooSmall { .. } => "GapTooSmall",
            Error::NotSkew { .. } => "NotSkew",
            Error::NotReal { .. } => "NotReal",
            Error::OddDimension { .. } => "OddDimension",
            Error::TooLarge { .. } => "TooLarge",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::BadDimension { .. } => "BadDimension",
            Error::NotUnitary { .. } => "NotUnitary",
            Error::ResidualTooLarge { .. } => "ResidualTooLarge",
            Error::NotSelfDual { .. } => "NotSelfDual",
            Error::NotSkewAfterPhi { .. } => "NotSkewAfterPhi",
            Error::NotProjection { .. } => "NotProjection",
            Error::CommutatorTooLarge { .. } => "CommutatorTooLarge",
            Error::PairingFailure => "PairingFailure",
            Error::WrongSymmetry { .. } => "WrongSymmetry",
            Error::DegenerateFailure => "DegenerateFailure",
            Error::NormConditionFailed { .. } => "NormConditionFailed",
            Error::NontrivialClass { .. } => "NontrivialClass",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::PerturbationFailed => "PerturbationFailed",
            Error::HypothesisFailed { .. } => "HypothesisFailed",
            Error::NotOrthonormal { .. } => "NotOrthonormal",
            Error::NormTooLarge { .. } => "NormTooLarge",
            Error::NotExactRepresentation { .. } => "NotExactRepresentation",
            Error::NotCommuting { .. } => "NotCommuting",
            Error::NoGap { .. } => "NoGap",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }
}
