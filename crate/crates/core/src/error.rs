use thiserror::Error;

/// Errors produced by the planning library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),

    #[error("invalid ship parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sequence lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("variance of an input sequence is zero")]
    ZeroVariance,

    #[error("need more than {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("least-squares system is rank deficient")]
    Singular,

    #[error("fitted relation is not increasing near {at_deg:.3} deg")]
    MonotonicityViolation { at_deg: f64 },

    #[error("heading change {requested:.3} deg outside reachable range [{lo:.3}, {hi:.3}]")]
    OutOfRange { requested: f64, lo: f64, hi: f64 },

    #[error("heading change {target_deg:.2} deg unreachable: {reason}")]
    Unreachable { target_deg: f64, reason: String },

    #[error("rudder search for heading change {target_deg:.2} deg did not converge")]
    NonConvergence { target_deg: f64 },

    #[error("cell for heading change {target_deg:.2} deg failed: {source}")]
    Cell {
        target_deg: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("points coincide")]
    CoincidentPoints,

    #[error("domain factor {0} outside [4, 8]")]
    FactorOutOfRange(f64),

    #[error("position is inside an obstacle (distance {distance:.3} m, radius {radius:.3} m)")]
    InsideObstacle { distance: f64, radius: f64 },

    #[error("start position lies inside obstacle {0}")]
    StartInsideObstacle(usize),

    #[error("destination lies inside obstacle {0}")]
    DestinationInsideObstacle(usize),

    #[error("own heading and obstacle course are parallel")]
    ParallelCourses,

    #[error("heading rays do not intersect ahead of both vessels")]
    NoForwardIntersection,

    #[error("no virtual obstacle radius resolves the encounter")]
    NoFeasibleRadius,

    #[error("grid search found no path to the destination")]
    NoGridPath,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors raised by a well-formed request that the planner or the cell
    /// generator cannot satisfy, as opposed to bad input.
    pub fn is_planning_failure(&self) -> bool {
        matches!(
            self,
            Error::Unreachable { .. }
                | Error::NonConvergence { .. }
                | Error::Cell { .. }
                | Error::MonotonicityViolation { .. }
                | Error::OutOfRange { .. }
                | Error::InsideObstacle { .. }
                | Error::ParallelCourses
                | Error::NoForwardIntersection
                | Error::NoFeasibleRadius
                | Error::NoGridPath
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
