//! Exact pure-dephasing dynamics of a qubit centrally coupled to a
//! transverse-field Ising ring.
//!
//! The pipeline runs [`spectrum`] (free-fermion modes for both qubit
//! branches) → [`echo`] (decoherence factor and Loschmidt echo) →
//! [`dynamics`] (time-local master-equation rates) → [`measures`]
//! (trace-distance, concurrence and Fisher-information non-Markovianity).
//! [`oracle`] is a brute-force exact-diagonalization check for small rings
//! and [`sweep`] drives parameter scans and CSV output.

pub mod dynamics;
pub mod echo;
pub mod error;
pub mod exec;
pub mod measures;
pub mod oracle;
pub mod qubit;
pub mod spectrum;
pub mod sweep;

pub use echo::{DecoherenceSeries, TimeGrid};
pub use error::{EchoError, Result};
pub use exec::Execution;
pub use qubit::QubitState;
pub use spectrum::{ChainConfig, Mode, ModeSpectrum};
