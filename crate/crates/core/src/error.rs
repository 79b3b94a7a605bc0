use crate::lattice::EdgeId;
use core::fmt;

/// Errors shared by all modules of the simulator core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Lattice size must be at least 1.
    InvalidSize,
    /// An operation that needs a nonempty edge set got an empty one.
    EmptyEdgeSet,
    /// Edge coordinates outside the lattice ranges.
    InvalidEdge,
    /// A product state does not cover the requested edge set.
    StateDomain,
    /// The measured or unmeasured edge set is not connected (doubled-graph
    /// construction requires both).
    Disconnected,
    /// A measurement step would break the connectivity precondition.
    ConnectivityViolation { step: usize, edge: EdgeId },
    /// A connected component carries an odd number of defect vertices, so the
    /// partition function is exactly zero.
    OddDefect,
    /// The matching expansion requires every vertex to have degree 3.
    NotThreeValent,
    /// The rotation system is inconsistent or fails the Euler check.
    Embedding(&'static str),
    /// The recorded outcome history has joint probability zero.
    DegenerateHistory { step: usize },
    /// Brute-force oracle requested beyond its hardcoded size limit.
    ResourceGuard(&'static str),
    /// Malformed strategy (repeated edge, wrong step count, bad reference).
    InvalidStrategy(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSize => write!(f, "lattice size must be at least 1"),
            Error::EmptyEdgeSet => write!(f, "edge set must be nonempty"),
            Error::InvalidEdge => write!(f, "edge coordinates out of range"),
            Error::StateDomain => write!(f, "product state does not cover the edge set"),
            Error::Disconnected => {
                write!(f, "measured and unmeasured edge sets must both be connected")
            }
            Error::ConnectivityViolation { step, edge } => write!(
                f,
                "connectivity violation at step {step}: measuring {edge:?} leaves a disconnected set"
            ),
            Error::OddDefect => write!(f, "odd defect count on a component: partition function is zero"),
            Error::NotThreeValent => write!(f, "matching expansion requires a 3-valent graph"),
            Error::Embedding(what) => write!(f, "invalid planar embedding: {what}"),
            Error::DegenerateHistory { step } => {
                write!(f, "outcome history has probability zero at step {step}")
            }
            Error::ResourceGuard(what) => write!(f, "oracle resource guard: {what}"),
            Error::InvalidStrategy(what) => write!(f, "invalid strategy: {what}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
