use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("conormal {index} is not primitive (gcd of entries is {gcd})")]
    NonPrimitiveColumn { index: usize, gcd: i64 },

    #[error("no strictly positive kernel vector with coefficients bounded by {bound}")]
    NoPositiveRelation { bound: i64 },

    #[error("level functionals on the kernel are not positively proportional")]
    NotProportional,

    #[error("kernel lattice has rank zero")]
    ZeroKernel,

    #[error("polytope has empty interior (best minimum slack {best_slack})")]
    EmptyInterior { best_slack: String },

    #[error("supplied interior point is not strictly interior: slack {slack} at facet {facet}")]
    InvalidInterior { facet: usize, slack: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("point is off the weighted sphere (residual {residual:e})")]
    OffSphere { residual: f64 },

    #[error("point is not on the moment level set (residual {residual:e})")]
    NotOnLevelSet { residual: f64 },

    #[error("moment differential has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("quaternion vector has norm {norm}, expected 1")]
    NonUnit { norm: f64 },

    #[error("matrix is not in SU(2): {0}")]
    NotSpecialUnitary(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invariant violated ({invariant}): {detail}")]
    InvariantViolation { invariant: String, detail: String },
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }

    pub(crate) fn invariant(invariant: &str, detail: impl Into<String>) -> Self {
        Error::InvariantViolation {
            invariant: invariant.to_string(),
            detail: detail.into(),
        }
    }
}
