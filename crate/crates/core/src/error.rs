use thiserror::Error;

/// Errors raised by geometric, reduction and shooting routines.
///
/// Scalar payloads are widened to `f64` so the type stays independent of the
/// scalar parameter.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("numeric differentiation failed: non-finite map output near coordinate {coordinate}")]
    DifferentiationFailure { coordinate: usize },
    #[error("group action is not free at this point: generator rank {rank} < {expected}")]
    NonFreeAction { rank: usize, expected: usize },
    #[error(
        "drift-free Legendre map is degenerate on the zero momentum level: image rank {rank} < {expected} \
         (non-degeneracy hypothesis of the connection construction fails)"
    )]
    DegenerateOnZeroMomentum { rank: usize, expected: usize },
    #[error("horizontal space meets the vertical space nontrivially (combined rank {rank} < {expected})")]
    ConnectionFailure { rank: usize, expected: usize },
    #[error("singular horizontal/vertical decomposition matrix")]
    SingularDecomposition,
    #[error("control frame at the translated point is rank deficient ({rank} < {expected})")]
    DegenerateFrame { rank: usize, expected: usize },
    #[error("control distribution is not invariant: least-squares residual {residual:.3e}")]
    NotInvariant { residual: f64 },
    #[error("cost metric is not positive definite")]
    SingularMetric,
    #[error("no unique optimal control: Newton iteration did not converge in {iterations} steps")]
    NoUniqueOptimalControl { iterations: usize },
    #[error("integration blew up after t = {last_valid_time}")]
    BlowUp { last_valid_time: f64 },
    #[error("group element leaves the chart domain (coordinate norm {norm:.4} >= {radius:.4})")]
    ChartDomain { norm: f64, radius: f64 },
    #[error(
        "Newton shooting did not converge in {iterations} iterations (residual {residual:.3e})"
    )]
    MaxIterations {
        iterations: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    },
    #[error("singular shooting Jacobian at iteration {iteration}")]
    SingularJacobian {
        iteration: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    },
    #[error("operation requires {expected}")]
    WrongProblemShape { expected: &'static str },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        })
    }
}
