use thiserror::Error;

/// Errors raised by the numerical operations of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// Gamma evaluated at a non-positive integer.
    #[error("gamma has a pole at x = {x}")]
    Pole { x: f64 },

    /// The requested accuracy could not be reached; carries the best value
    /// found and an honest bound on its absolute error.
    #[error("accuracy loss: best value {value:e} with estimated absolute error {est_abs_error:e}")]
    AccuracyLoss { value: f64, est_abs_error: f64 },

    /// Not enough samples for the operation.
    #[error("size error in {op}: need at least {needed} nodes, got {got}")]
    Size {
        op: &'static str,
        needed: usize,
        got: usize,
    },

    /// A non-finite value appeared while marching forward in time.
    #[error("divergence at node {node}: last good node was {last_good}")]
    Divergence { node: usize, last_good: usize },

    /// The curvature operator saturated (|u| reached 1).
    #[error("gradient blow-up at step {step} (t = {t}): |u| = {u_abs} >= 1 - 1e-9")]
    GradientBlowup { step: usize, t: f64, u_abs: f64 },

    /// Every node was masked out, nothing left to report.
    #[error("empty result in {op}: every node is masked")]
    EmptyResult { op: &'static str },

    /// Two grid functions do not share a mesh.
    #[error("mesh mismatch in {op}")]
    MeshMismatch { op: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Error {
    Error::Domain { op, msg: msg.into() }
}
