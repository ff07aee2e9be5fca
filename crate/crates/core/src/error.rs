use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertices are in clockwise order (signed area {0:.3e})")]
    ClockwiseOrder(f64),
    #[error("polygon is not strictly convex at vertex {0}")]
    NonConvex(usize),
    #[error("side {0} has zero length")]
    DegenerateSide(usize),
    #[error("gauge image violates the half-plane condition: {0}")]
    GeometryViolation(String),
    #[error("spectral parameter lambda must be nonzero")]
    ZeroLambda,
    #[error("exponential-solution parameter mu must be nonzero")]
    ZeroMu,
    #[error("test function supplies derivatives up to order {available}, datum needs {needed}")]
    InsufficientDerivativeOrder { needed: usize, available: usize },
    #[error("Dirac order {0} exceeds the supported maximum")]
    DiracOrderTooHigh(usize),
    #[error("adaptive quadrature did not converge (last change {0:.3e})")]
    QuadratureNonConvergence(f64),
    #[error("boundary data cover {got} sides, polygon has {expected}")]
    SideCountMismatch { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("collocation matrix is rank deficient (rank {rank} of {cols}, condition {condition:.3e})")]
    RankDeficient { rank: usize, cols: usize, condition: f64 },
    #[error("validation residual {residual:.3e} exceeds threshold {threshold:.3e}")]
    NonConvergence { residual: f64, threshold: f64 },
    #[error("point {0} is not strictly interior")]
    PointNotInterior(String),
    #[error("point {0} lies on the boundary")]
    PointOnBoundary(String),
    #[error("ray truncation failed: envelope bound {achieved:.3e} never fell below tolerance")]
    TruncationFailure { achieved: f64 },
    #[error("interior angle must lie in (0, pi), got {0}")]
    AngleOutOfRange(f64),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("constraint c1 - c2 = 1 violated (c1 - c2 = {0})")]
    ConstraintViolation(f64),
    #[error("polygon is not in the aligned gauge: {0}")]
    GaugeViolation(String),
    #[error("decay fit failed: {0}")]
    FitFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
