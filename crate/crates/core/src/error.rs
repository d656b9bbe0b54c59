use thiserror::Error;

/// Error type shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A register or lattice size that cannot be constructed.
    #[error("invalid size: {0}")]
    InvalidSize(String),

    /// Qubit index out of range or repeated gate target.
    #[error("bad qubit index: {0}")]
    Index(String),

    /// Overlapping subsets passed where disjoint ones are required.
    #[error("overlapping subsets: {0}")]
    Overlap(String),

    /// Argument outside the mathematical domain of a special function or map.
    #[error("domain error: {0}")]
    Domain(String),

    /// A probe whose boundary points coincide (cross ratio undefined).
    #[error("degenerate probe: {0}")]
    DegenerateProbe(String),

    /// A probe scheduled before the qubits it refers to exist.
    #[error("schedule error: {0}")]
    Schedule(String),

    /// Not enough points, or a degenerate abscissa spread, for a fit.
    #[error("fit error: {0}")]
    Fit(String),

    /// Brickwork geometry constraint violated.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Invalid run configuration (bad layout, preset, grid, ...).
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
