use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("intersection matrix must be square with 2 <= rho <= 4, got {0}")]
    BadShape(String),
    #[error("intersection matrix is not symmetric")]
    NotSymmetric,
    #[error("intersection form has signature ({positive}, {negative}) with {zero} null directions; expected (1, rho-1)")]
    WrongSignature { positive: usize, negative: usize, zero: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero vector has no primitive part")]
    ZeroVector,
    #[error("map does not preserve the intersection form")]
    NotIsometry,
    #[error("map does not preserve the forward cone")]
    ReversesCone,
    #[error("class is not in the closed forward cone")]
    NotForward,
    #[error("cap must be positive")]
    CapNotPositive,
    #[error("class is not in the open forward cone")]
    DenominatorNonPositive,
    #[error("bound must be positive")]
    BoundNotPositive,
    #[error("{0} is a perfect square")]
    PerfectSquare(String),
    #[error("class is not primitive (content {0})")]
    NotPrimitive(i64),
    #[error("class is not ample")]
    NotAmple,
    #[error("class has square self-intersection {0}")]
    SquareSelfIntersection(i128),
    #[error("operation requires Picard number 2, got {0}")]
    WrongRho(usize),
    #[error("upper bound is not strictly below the square-root bound")]
    BoundNotSubmaximal,
    #[error("expected {expected} windows, got {got}")]
    WindowCountMismatch { expected: usize, got: usize },
    #[error("volume bound must be positive")]
    ZetaNotPositive,
    #[error("class is not nef")]
    NotNef,
    #[error("class has irrational direction")]
    IrrationalClass,
    #[error("grid point {0} is outside the nef cross-section")]
    GridPointNotNef(String),
    #[error("unknown plot format {0:?}")]
    UnknownFormat(String),
    #[error("bad matrix family: {0}")]
    BadFamily(String),
    #[error("search region too large: {0}")]
    SearchTooLarge(String),
}

impl Error {
    /// True for errors caused by the matrix or the syntax of the request
    /// (as opposed to an operation's precondition on a valid input).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::BadShape(_)
                | Error::NotSymmetric
                | Error::WrongSignature { .. }
                | Error::DimensionMismatch { .. }
                | Error::UnknownFormat(_)
                | Error::BadFamily(_)
        )
    }
}
