use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("table is not square: row {row} has length {len}, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("entry {value} at ({row}, {col}) is out of range for order {order}")]
    EntryOutOfRange { row: usize, col: usize, value: usize, order: usize },
    #[error("table is not a Latin square: {0}")]
    NotLatinSquare(String),
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("not associative: ({0}*{1})*{2} != {0}*({1}*{2})")]
    NotAssociative(usize, usize, usize),
    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("group is not abelian: {0}*{1} != {1}*{0}")]
    NotAbelian(usize, usize),
    #[error("class-matrix combination failed to separate characters after {attempts} attempts")]
    EigensolveDegenerate { attempts: usize },
    #[error("orthogonality check failed: residual {0:e}")]
    OrthogonalityFailure(f64),
    #[error("Frobenius-Schur indicator is ambiguous: value {0}")]
    IndicatorAmbiguous(f64),
    #[error("character {0} of complex type has no conjugate row")]
    PairingFailure(usize),
    #[error("certification failed on {what}: residual {residual:e}")]
    CertificationFailure { what: String, residual: f64 },
    #[error("multiplicity mismatch for character {index}: regular {regular}, expected {expected}")]
    MultiplicityMismatch { index: usize, regular: f64, expected: f64 },
    #[error("not a homomorphism: f({0}*{1}) != f({0})*f({1})")]
    NotHomomorphism(usize, usize),
    #[error("map is not surjective onto level {0}")]
    NotSurjective(usize),
    #[error("not a subgroup: {0}")]
    NotSubgroup(String),
    #[error("invalid Lie algebra: {0}")]
    InvalidLieAlgebra(String),
    #[error("cutoff mismatch: {0} vs {1}")]
    CutoffMismatch(usize, usize),
    #[error("element has nonzero constant term")]
    NonzeroConstantTerm,
    #[error("straightening exceeded the budget of {0} rewrite steps")]
    StraighteningBudgetExceeded(usize),
    #[error("dimension mismatch in degree {0}")]
    DimensionMismatch(usize),
    #[error("probe failure at {probe}: residual {residual:e}")]
    ProbeFailure { probe: String, residual: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Malformed or inconsistent input, as opposed to a computation that failed.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::EigensolveDegenerate { .. }
                | Error::OrthogonalityFailure(_)
                | Error::IndicatorAmbiguous(_)
                | Error::PairingFailure(_)
                | Error::CertificationFailure { .. }
                | Error::MultiplicityMismatch { .. }
                | Error::StraighteningBudgetExceeded(_)
                | Error::DimensionMismatch(_)
                | Error::ProbeFailure { .. }
        )
    }
}
