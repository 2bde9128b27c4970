use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("singular metric: G = {g:.3e} < {lambda:.3e} at parameter ({x1}, {x2}), t = {t}")]
    SingularMetric {
        g: f64,
        lambda: f64,
        x1: f64,
        x2: f64,
        t: f64,
    },
    #[error("node ({i}, {j}) is a junction of two boundary segments; pick a segment")]
    CornerNode { i: usize, j: usize },
    #[error("node ({i}, {j}) is not on the boundary")]
    NotOnBoundary { i: usize, j: usize },
    #[error("boundary segment {segment} has a vanishing line element at node {node}")]
    DegenerateSegment { segment: usize, node: usize },
    #[error("parameter point ({x1}, {x2}) lies outside the domain")]
    OutsideDomain { x1: f64, x2: f64 },
    #[error("time {t} outside [0, {horizon})")]
    OutsideTimeWindow { t: f64, horizon: f64 },
    #[error("finite differences need at least {needed} time levels, got {got}")]
    InsufficientTimeLevels { needed: usize, got: usize },
    #[error("step {dt:.3e} exceeds the stability bound {bound:.3e}")]
    CflViolation { dt: f64, bound: f64 },
    #[error("density became non-positive ({value:.3e}) at node {node}")]
    NonpositiveDensity { node: usize, value: f64 },
    #[error("density or temperature non-positive ({value:.3e}) at node {node}")]
    NonpositiveThermo { node: usize, value: f64 },
    #[error("difference quotient dominated by cancellation (errors {coarse:.3e} -> {fine:.3e})")]
    StepTooSmall { coarse: f64, fine: f64 },
    #[error("grid mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
