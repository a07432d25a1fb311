//! Core numerics for Hamiltonian-driven quantum reservoir computing.
//!
//! A register of `n_sys` measured system qubits and `n_env` unmeasured
//! environment qubits evolves under a fixed spin Hamiltonian. Each input
//! step resets one system qubit to an encoded input state, then the joint
//! density matrix evolves unitarily while Pauli-Z expectations of the
//! system are sampled at `V` virtual nodes. The features feed a linear
//! readout trained by pseudoinverse least squares.
//!
//! Everything here is pure computation on `alloc` containers; file formats,
//! configuration and the command line live in the `nmqrc` crate.
//!
//! Qubit ordering: qubit 0 is the most significant bit of a basis index.
//! System qubits are `0..n_sys`, environment qubits `n_sys..n_sys + n_env`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;

pub mod esp;
pub mod hamiltonian;
pub mod linalg;
pub mod readout;
pub mod reservoir;
pub mod stats;
pub mod tasks;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix, RealMatrix, C64};
