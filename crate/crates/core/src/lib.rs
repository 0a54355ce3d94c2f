//! Postselected weak-measurement thermometry of a single spin read out by a
//! cantilever pointer.
//!
//! A spin in a thermal state `ρ_s = e^{−βH_s}/Z` couples weakly to a harmonic
//! pointer through `−g S_z ⊗ z`. After postselecting the spin on `|ψ_f⟩` the
//! pointer is displaced by the weak value `S_w`, whose β-dependence lets the
//! pointer's position and momentum act as a thermometer. The crate covers the
//! whole chain: Gibbs state, weak values and their inversion, exact and
//! first-order pointer dynamics, quantum Fisher information, and a Monte-Carlo
//! rehearsal of the measurement.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod linalg;
pub mod metrology;
pub mod pointer;
pub mod sampling;
pub mod spin;
pub mod weak;

pub use error::{Result, ThermoError};
