//! Dissipative cat-code simulator.
//!
//! Lindblad dynamics with the multi-photon jump operator
//! `F = √κ ∏_ν (a − α_ν)`, adiabatic loop and collision gates acting on its
//! decoherence-free subspace, and Berry connections of the steady states.

pub mod catcode;
pub mod error;
pub mod fockspace;
pub mod gates;
pub mod harness;
pub mod holonomy;
pub mod liouvillian;

pub use error::{Error, Result};
pub use fockspace::C64;
