//! Simulation core for plaquette-model topological qubits.
//!
//! Pauli algebra, lattice Hamiltonians, a matrix-free eigensolver, logical
//! operator analysis, single-qubit control and interference readout. The
//! crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod eigen;
pub mod error;
pub mod interference;
pub mod lattice;
pub mod model;
pub mod pauli;
pub mod qubit;
pub mod state;
pub mod toric;

pub use error::{Error, Result};
pub use lattice::{LatticeSpec, ParityClass};
pub use model::{HamiltonianSpec, Params, Term};
pub use pauli::{Pauli, PauliString, Phase};
pub use state::StateVector;
