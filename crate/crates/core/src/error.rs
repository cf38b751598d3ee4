use thiserror::Error;

use crate::grid::Dims;

/// Errors from constructing or combining grid quantities.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("value count {got} does not match grid size {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("grid values must be finite")]
    NonFinite,
    #[error("grid spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("grid dimensions must be nonzero")]
    EmptyDims,
    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: Dims, right: Dims },
}

/// Errors from constructing a `DiscreteMeasure`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("points and weights differ in length ({points} vs {weights})")]
    LengthMismatch { points: usize, weights: usize },
    #[error("point dimension must be 1 or 2, got {0}")]
    BadDimension(usize),
    #[error("points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),
    #[error("weight {0} is zero or not finite")]
    BadWeight(usize),
    #[error("coordinates must be finite")]
    NonFinite,
    #[error("measure must contain at least one point")]
    Empty,
}

/// Errors from invalid regularization parameters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("lambda1 must be positive (or +inf), got {0}")]
    BadLambda1(f64),
    #[error("lambda2 must be positive (or +inf), got {0}")]
    BadLambda2(f64),
}

/// Errors raised by the primal-dual saddle-point solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("operator pair fails the adjointness probe: defect {defect:.3e} exceeds {tol:.3e}")]
    NonAdjointOperator { defect: f64, tol: f64 },
    #[error("iterates became non-finite at iteration {iter}")]
    Diverged { iter: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

/// Errors from the model-level drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("lambda1 and lambda2 cannot both be infinite")]
    BothLambdasInfinite,
    #[error("parameter must be positive, got {0}")]
    BadParameter(f64),
    #[error("equality constraint residual {residual:.3e} above tolerance {tol:.3e} at termination")]
    ConstraintNotMet { residual: f64, tol: f64 },
    #[error("solver stopped at relative gap {gap:.3e} after {iterations} iterations without converging")]
    NotConverged { gap: f64, iterations: usize },
    #[error("bracket [{lo}, {hi}] does not straddle target TV {target}; sampled curve: {samples:?}")]
    BracketDoesNotStraddle {
        lo: f64,
        hi: f64,
        target: f64,
        samples: Vec<(f64, f64)>,
    },
    #[error("bisection failed to reach {target} within {tol:.1}% after {iters} iterations")]
    BisectionStalled { target: f64, tol: f64, iters: usize },
}

/// Errors from the exact KR-norm oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KrNormError {
    #[error("oracle accepts at most {max} points, got {n}")]
    TooManyPoints { n: usize, max: usize },
    #[error("the exact oracle requires a finite lambda1")]
    InfiniteLambda1,
    #[error("linear program failed: {0}")]
    Lp(#[from] LpError),
    #[error(
        "optimality certificate failed: gap {gap:.3e}, primal infeasibility {primal_inf:.3e}, \
         dual infeasibility {dual_inf:.3e}"
    )]
    CertificateFailed {
        gap: f64,
        primal_inf: f64,
        dual_inf: f64,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors from the dense simplex solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("problem is unbounded along column {0}")]
    Unbounded(usize),
    #[error("simplex iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("initial basis is singular")]
    SingularBasis,
    #[error("malformed program: {0}")]
    Malformed(String),
}
