use alloc::string::String;

/// Errors raised by the exact algebra and the pipelines built on it.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("axis mismatch: {0}")]
    AxisMismatch(String),
    #[error("axis {axis} out of range for a function of {dim} axes")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("fiber not integrable: nonzero tail along line axis {0}")]
    FiberNotIntegrable(usize),
    #[error("cumulative integral along circle axis {0} is not single-valued")]
    CircleCumulative(usize),
    #[error("cumulative integral needs zero tails along axis {0}")]
    NonzeroTail(usize),
    #[error("degenerate interval: {0}")]
    DegenerateInterval(String),
    #[error("invalid piecewise data: {0}")]
    InvalidData(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("form is not closed: d of component {0} is nonzero")]
    NotClosed(String),
    #[error("invalid cover: {0}")]
    InvalidCover(String),
    #[error("wrapped intersection: {0}")]
    WrappedIntersection(String),
    #[error("support violation: {0}")]
    Support(String),
    #[error("zig-zag hypothesis failed: {0}")]
    Hypothesis(String),
    #[error("identity check failed: {0}")]
    Identity(String),
    #[error("relative data violates vanishing near B: {0}")]
    Relative(String),
    #[error("form is not exact: {0}")]
    NotExact(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = core::result::Result<T, Error>;
