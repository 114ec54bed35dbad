//! Semiclassical quasi-flow for oscillators with Hamiltonian f(|β|²).
//!
//! The crate computes the ħ² correction to the classical flow of the
//! ladder-operator symbol, the quantum discrepancy of evolved observables, and
//! the composition of Weyl symbols under canonical changes of variables. A
//! truncated Fock-space oracle ([`fock`]) provides exact reference values.

#[cfg(feature = "cli")]
pub mod cli;
pub mod composition;
pub mod discrepancy;
pub mod error;
pub mod extrapolate;
pub mod fock;
pub mod jet;
pub mod laguerre;
pub mod moyal;
pub mod phase_space;
pub mod quasi_flow;
pub mod symbol;

pub use error::{Error, Result};
