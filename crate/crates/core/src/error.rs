use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("map is not strictly monotone: {0}")]
    Monotonicity(String),

    #[error("parameter ({u}, {v}) outside the admissible domain of {surface}")]
    Domain { surface: String, u: f64, v: f64 },

    #[error("degenerate chart: {0}")]
    Regularity(String),

    #[error("chart is not principal at node ({i}, {j}): |F| = {f:e}, |M| = {m:e}")]
    NotPrincipal { i: usize, j: usize, f: f64, m: f64 },

    #[error("zero tangent direction")]
    DegenerateDirection,

    #[error("{count} umbilical node(s); worst at ({i}, {j}) with |nu1 - nu2| = {gap:e}")]
    Umbilic { count: usize, i: usize, j: usize, gap: f64 },

    #[error("H^2 - K is not positive at node ({i}, {j}): {value:e}")]
    Discriminant { i: usize, j: usize, value: f64 },

    #[error("Codazzi equations violated: integrand variation {variation:e} exceeds {tolerance:e}")]
    CodazziViolation { variation: f64, tolerance: f64 },

    #[error("frame integration failed: {0}")]
    Integration(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("field must be positive: {0}")]
    Positivity(String),

    #[error("mean curvature vanishes at node ({i}, {j})")]
    ZeroMeanCurvature { i: usize, j: usize },

    #[error("invariants are incompatible: residual decreased by only {ratio:.3} under refinement")]
    IncompatibleInvariants { ratio: f64 },

    #[error("unknown surface `{0}`")]
    UnknownSurface(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
