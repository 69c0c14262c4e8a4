//! Detecting and classifying quantum phase transitions with principal
//! component analysis of randomized Pauli measurement data.
//!
//! The crate covers the whole chain on desk-scale systems: lattices and
//! Pauli-string Hamiltonians ([`lattice`], [`model`]), exact ground states
//! ([`groundstate`]), randomized single-site Pauli measurements and classical
//! shadows ([`shadow`]), streaming covariance and PCA spectra ([`spectra`]),
//! the noise-free covariance computed from expectation values ([`oracle`]),
//! and parameter sweeps with peak detection, classification and SVG output
//! ([`pipeline`]).

pub mod error;
pub mod exec;
pub mod groundstate;
pub mod lattice;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod shadow;
pub mod spectra;
pub mod state;

pub use error::{Error, Result};
pub use exec::Exec;
pub use groundstate::{ground_state, GroundStateReport, PinningPolicy, SolverOptions};
pub use lattice::{Boundary, Lattice};
pub use model::{Axis, ModelTerms, PauliString};
pub use state::StateVector;
