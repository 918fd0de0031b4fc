use thiserror::Error;

/// Why a constraint matrix could not be inverted.
#[derive(Debug, Clone, PartialEq)]
pub enum Singularity {
    /// The symplectic engine needs an even number of constraints; an odd
    /// antisymmetric matrix always has zero determinant.
    OddConstraintCount(usize),
    /// Smallest singular value fell below the scale-relative threshold.
    IllConditioned { smallest: f64, largest: f64 },
}

impl std::fmt::Display for Singularity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Singularity::OddConstraintCount(n) => {
                write!(f, "symplectic engine requires an even number of constraints, got {n}")
            }
            Singularity::IllConditioned { smallest, largest } => {
                write!(f, "smallest singular value {smallest:e} below threshold (largest {largest:e})")
            }
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("vector is not tangent to its base state (overlap {overlap:e})")]
    NotTangent { overlap: f64 },
    #[error("invalid coordinates: {0}")]
    InvalidCoordinates(String),
    #[error("basis is not orthonormal (max deviation {deviation:e})")]
    Basis { deviation: f64 },
    #[error("singular constraint matrix: {0}")]
    SingularConstraintMatrix(Singularity),
    #[error("chart singularity: {0}")]
    ChartSingularity(String),
    #[error("evaluation error: {0}")]
    Evaluation(String),
    #[error("constraint drift {drift:e} exceeded threshold {threshold:e} at t = {t}")]
    DriftAbort { drift: f64, threshold: f64, t: f64 },
    #[error("step limit of {max_steps} exhausted at t = {t}")]
    StepLimit { max_steps: usize, t: f64 },
    #[error("field evaluation failed at t = {t}: {source}")]
    Field { t: f64, source: Box<Error> },
    #[error("projection did not converge after {iterations} iterations (residual {residual:e})")]
    ProjectionFailure { iterations: usize, residual: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unknown model '{0}'")]
    UnknownModel(String),
}

impl Error {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Dimension { .. } => "DimensionError",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NotTangent { .. } => "NotTangent",
            Error::InvalidCoordinates(_) => "InvalidCoordinates",
            Error::Basis { .. } => "BasisError",
            Error::SingularConstraintMatrix(_) => "SingularConstraintMatrix",
            Error::ChartSingularity(_) => "ChartSingularity",
            Error::Evaluation(_) => "EvaluationError",
            Error::DriftAbort { .. } => "DriftAbort",
            Error::StepLimit { .. } => "StepLimit",
            Error::Field { .. } => "FieldError",
            Error::ProjectionFailure { .. } => "ProjectionFailure",
            Error::InvalidInput(_) => "InvalidInput",
            Error::UnknownModel(_) => "UnknownModel",
        }
    }

    /// Singular-matrix and chart failures are properties of the point in state
    /// space rather than malformed input.
    pub fn is_singularity(&self) -> bool {
        match self {
            Error::SingularConstraintMatrix(_) | Error::ChartSingularity(_) => true,
            Error::Field { source, .. } => source.is_singularity(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
