//! Simulation and analysis toolkit for the measurement-driven entanglement
//! transition in hybrid random Clifford circuits.
//!
//! The crate is organized around the pipeline
//!
//! ```text
//! stabilizer  ->  entropy  ->  harness  ->  series  ->  fit
//!                                  |
//!                 cft (conformal coordinates attached at analysis time)
//!                 percolation (independent min-cut comparator, same output shape)
//! ```
//!
//! `stabilizer` is an exact bit-packed CHP-style simulator, `entropy` computes
//! von Neumann entropies of qubit subsets from GF(2) ranks (or from the
//! clipped gauge for contiguous intervals), `harness` runs the
//! boundary-condition experiments, `cft` supplies the elliptic special
//! functions and boundary conformal maps used to build collapse coordinates,
//! `fit` extracts exponents, and `percolation` is the first-passage
//! percolation comparator solved by max-flow.

pub mod cft;
pub mod driver;
pub mod entropy;
pub mod error;
pub mod fit;
pub mod harness;
pub mod percolation;
pub mod seed;
pub mod series;
pub mod stabilizer;

pub use error::Error;
pub use stabilizer::{CliffordGate, MeasureOutcome, PauliString, StabilizerTableau};

/// Entropies are stored internally as exact integer multiples of `ln 2`
/// and converted to nats only at serialization or fitting time.
pub const LN2: f64 = std::f64::consts::LN_2;
