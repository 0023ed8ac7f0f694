//! Markovian open-system dynamics for a single bosonic mode (and small
//! finite-level systems), with the thermodynamic bookkeeping built on top:
//! entropies, heat and particle currents, load power, entropy production,
//! ergotropy.
//!
//! Modules:
//! - [`fock`]: truncated Fock spaces, operators, standard states
//! - [`lindblad`]: GKLS generators, RK4 evolution, stationary states
//! - [`birthdeath`]: photon-number birth–death chains and a Gillespie sampler
//! - [`thermo`]: entropies, currents, laws of thermodynamics, ergotropy
//! - [`scenarios`]: validated model presets
//! - [`cli`]: config-driven runner behind the `gkls-thermo` binary

pub mod birthdeath;
pub mod cli;
pub mod error;
pub mod fock;
pub mod lindblad;
pub mod linalg;
pub mod scenarios;
pub mod thermo;

pub use error::{Error, Result};
pub use fock::{DensityMatrix, HilbertSpace, Operator};
pub use lindblad::GeneratorSpec;
