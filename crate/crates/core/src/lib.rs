//! Exact simulation of bosons in a tilted optical lattice.
//!
//! The crate builds the tilted (Stark) Bose-Hubbard model in the fixed-N
//! Fock basis, propagates states and their gradient derivatives under
//! exp(-iHt), and evaluates the quantum Fisher information of the evolved
//! probe together with the scaling analyses and gravimetric sensitivity
//! conversions built on top of it.

pub mod analysis;
pub mod basis;
pub mod error;
pub mod gravimetry;
pub mod hamiltonian;
pub mod observables;
pub mod propagator;
pub mod qfi;

mod cvec;
mod eig;
mod expm;

pub use basis::{dimension, staggered_initial_state, BasisIndex, FockState};
pub use error::{Error, Result};
pub use hamiltonian::{build_gradient_generator, build_hamiltonian, ModelParams, SparseHermitian};
pub use propagator::{evolve, evolve_with_derivative, EvolveOptions, EvolvedPair, Method};
pub use qfi::{cramer_rao_bound, qfi_pure, QfiSample};
