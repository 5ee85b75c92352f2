//! Exact dynamics of two qubits dephasing through a shared, gapped,
//! periodic harmonic chain.
//!
//! The qubits couple to the chain through `σ_x`, which is conserved, so the
//! reduced density matrix in the `σ_x` product basis evolves element by
//! element. Every element picks up a decay exponent and a phase that are
//! sums over the chain's normal modes. The crate builds those mode sums
//! ([`chain`], [`propagator`]), turns them into states and concurrence
//! ([`qubits`]), correlation functions ([`observables`]) and derived
//! quantities such as average concurrence, entanglement generation time
//! and phase diagrams ([`analysis`]). A brute-force truncated Fock
//! simulation ([`oracle`]) serves as an independent check on small chains.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod chain;
pub mod error;
pub mod numeric;
pub mod observables;
pub mod oracle;
pub mod propagator;
pub mod qubits;

pub use error::{Error, Result};
pub use num_complex::Complex64;
