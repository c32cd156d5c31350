use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    /// A quaternion fed to `log` was not unit within tolerance.
    #[error("quaternion is not unit within tolerance (norm {norm})")]
    InvalidQuaternion { norm: f64 },

    /// The rotation between two antiparallel vectors has no unique axis.
    #[error("rotation between antiparallel vectors is ambiguous")]
    AmbiguousRotation,

    /// A measurement vector was unusable (zero or collinear pair).
    #[error("degenerate measurement: {0}")]
    DegenerateMeasurement(&'static str),

    /// The innovation covariance could not be inverted reliably.
    #[error("innovation covariance is singular or ill-conditioned")]
    SingularInnovation,

    /// The plane constraint has no intersection with the measurement cone.
    #[error("no intersection with the plane constraint")]
    NoIntersection,

    /// Two orientation traces that must be compared sample-by-sample differ in length.
    #[error("orientation traces have mismatched lengths ({left} vs {right})")]
    TraceMismatch { left: usize, right: usize },

    /// Invalid configuration value.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A required CSV column is absent from the header.
    #[error("missing column '{0}'")]
    MissingColumn(String),

    /// Timestamps must increase strictly along a stream.
    #[error("non-monotonic timestamp at line {line}")]
    NonMonotonicTime { line: usize },

    /// A CSV row could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The ground-truth trace does not cover a sample time.
    #[error("ground truth does not cover sample time {time} (truth span [{start}, {end}])")]
    CoverageGap { time: f64, start: f64, end: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
