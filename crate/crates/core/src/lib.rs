//! Desk-scale toolkit for hybrid quantum-chemistry workflows.
//!
//! The crate covers the classical side of an adaptive-VQE pipeline end to end:
//!
//! * [`hamiltonian`] — FCIDUMP ingestion, frozen-core folding, reference
//!   energies, and multi-layer (ONIOM / WF-in-DFT) energy combination.
//! * [`orbitals`] — fragment orbital assignment from localized MO
//!   coefficients, subspace MP2 amplitudes, and natural-virtual selection.
//! * [`pauli`] / [`jw`] — a small Pauli algebra and the Jordan-Wigner map.
//! * [`circuit`] — gate-level IR plus the qubit-excitation singles/doubles
//!   builders used by the adaptive ansatz.
//! * [`simulator`] — dense statevector simulation, exact expectation values,
//!   and seeded computational-basis sampling.
//! * [`slater`] / [`casci`] — Slater-Condon matrix elements and exact
//!   diagonalization references (determinant basis and dense Jordan-Wigner).
//! * [`solver`] — the adaptive solver loop with sampling-based operator
//!   selection and full parameter re-optimization.
//! * [`circuit_opt`] — slice-and-resynthesize CNOT reduction and one-qubit
//!   gate simplification.
//! * [`neb`] — nudged-elastic-band path optimization over pluggable
//!   analytic potentials.

pub mod casci;
pub mod circuit;
pub mod circuit_opt;
pub mod hamiltonian;
pub mod jw;
pub mod linalg;
pub mod neb;
pub mod orbitals;
pub mod pauli;
pub mod simulator;
pub mod slater;
pub mod solver;

pub use hamiltonian::FermionHamiltonian;
pub use pauli::{PauliString, PauliSum};

/// Hartree → kcal/mol. Applied at reporting boundaries only; all internal
/// energies stay in Hartree.
pub const HARTREE_TO_KCAL: f64 = 627.5094740631;
