//! Error type shared across the crate.

use thiserror::Error;

use crate::lattice::SiteId;

/// Errors produced by lattice, transport, and expectation operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("site {coords:?} out of bounds for lattice extent {extent:?}")]
    OutOfBounds { coords: Vec<usize>, extent: Vec<usize> },

    #[error("site {site} has no neighbor along axis {axis} (sign {sign:+})")]
    NoNeighbor { site: SiteId, axis: usize, sign: i8 },

    #[error("path sites {from} and {to} are not lattice neighbors")]
    NonAdjacentPath { from: SiteId, to: SiteId },

    /// Cross-site arithmetic: numbers or states inhabit different
    /// per-site structures and cannot be combined without transport.
    #[error("structure mismatch: operands live at {left} and {right}")]
    StructureMismatch { left: SiteId, right: SiteId },

    #[error("basis mismatch: {left} vs {right}")]
    BasisMismatch { left: String, right: String },

    #[error("division by zero")]
    DivisionByZero,

    #[error("lattice has {sites} sites, exceeding the cap of {cap}")]
    LatticeTooLarge { sites: usize, cap: usize },

    #[error("theta value {value} at site {site} exceeds the |theta| <= {cap} cap")]
    ThetaOutOfRange { site: SiteId, value: f64, cap: f64 },

    #[error("momentum {k} is not on the reciprocal grid 2*pi*n/(N*spacing) for axis {axis}")]
    OffGridMomentum { k: f64, axis: usize },

    #[error("observable {kind} is not supported by this operation")]
    UnsupportedObservable { kind: String },

    #[error("matrix is not Hermitian (max asymmetry {max_asymmetry:.3e})")]
    NotHermitian { max_asymmetry: f64 },

    #[error("wave packet has empty support")]
    EmptySupport,

    #[error("cannot interpret outcome symbols {symbols:?} as a number")]
    Format { symbols: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
