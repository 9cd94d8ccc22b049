use thiserror::Error;

/// Crate-wide error type. Variants are grouped by the CLI exit-code class
/// they map to: argument/input problems, domain failures (degeneracy,
/// oracle mismatch), and internal invariant violations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("utility out of range, every entry must be a rational in [0,1]: {0}")]
    UtilityRange(String),
    #[error("unsupported player count {found} ({context})")]
    Players { found: usize, context: &'static str },
    #[error("desk-scale limit exceeded: {0}")]
    DeskScale(String),
    #[error("invalid rational literal `{0}` (expected reduced `num/den` with den > 0)")]
    Rational(String),
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("degenerate game: {0}")]
    Degenerate(String),
    #[error("zero direction vector")]
    ZeroDirection,
    #[error("direction leaves the profile affine hull: {0}")]
    NonTangent(String),
    #[error("no equilibria available")]
    NoEquilibria,
    #[error("oracle mismatch: the queried direction contains no Nash equilibrium")]
    OracleMismatch,
    #[error("no trials requested")]
    NoTrials,
    #[error("query outside the profile space: {0}")]
    QueryOutsideDomain(String),
    #[error("resampling cap exceeded after {0} attempts")]
    ResampleCap(usize),
    #[error("claims check did not pass; the consistent-dynamic construction requires all three")]
    ClaimsFailed,
    #[error("input is not a cycle of the response map: {0}")]
    NotACycle(String),

    #[error("not a Lyapunov pair: at step {step}, L = {before} then {after}")]
    LyapunovViolation {
        step: usize,
        x: Vec<f64>,
        before: f64,
        after: f64,
    },
    #[error("step limit {0} exceeded")]
    StepLimit(usize),
    #[error("trajectory left the profile space: {0}")]
    LeftDomain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit-code class used by the command-line tool: 2 argument error,
    /// 3 domain error, 4 internal invariant violation.
    pub fn exit_class(&self) -> i32 {
        use Error::*;
        match self {
            Dimension(_) | UtilityRange(_) | Players { .. } | DeskScale(_) | Rational(_)
            | Malformed(_) | NoTrials | Io(_) | Json(_) => 2,
            Degenerate(_) | ZeroDirection | NonTangent(_) | NoEquilibria | OracleMismatch
            | QueryOutsideDomain(_) | ResampleCap(_) | ClaimsFailed | NotACycle(_) => 3,
            LyapunovViolation { .. } | StepLimit(_) | LeftDomain(_) => 4,
        }
    }
}
