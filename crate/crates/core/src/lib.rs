//! Simulation and verification toolkit for three-photon polarization/OAM
//! hyper-entanglement.
//!
//! - [`hilbert`]: dense state vectors, operators and Born-rule sampling.
//! - [`photonreg`]: photon/DOF layout of composite registers.
//! - [`gates`]: wave plates, intra- and inter-photon controlled flips, the
//!   polarization/OAM swap and analyzer bases.
//! - [`teleport`]: two-qubit teleportation through spin-orbit Bell analysis.
//! - [`qkd`]: the entanglement-based key distribution protocol with CHSH and
//!   qutrit Bell tests.

pub mod error;
pub mod gates;
pub mod hilbert;
pub mod photonreg;
pub mod qkd;
pub mod teleport;

pub use error::{Error, Result};
