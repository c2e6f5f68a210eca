//! Deciding local invertibility of multi-qubit interaction evolutions.
//!
//! Given an n-qubit interaction Hamiltonian H (a real sum of Pauli strings),
//! this crate decides whether the evolution exp(-itH) can be undone purely by
//! local unitaries from SU(2)^⊗n:
//!
//! * **type-I**: some local K satisfies K H K⁻¹ = -H, so the whole
//!   one-parameter group is inverted jointly for all t;
//! * **self-inverse**: U(τ)² is a phase multiple of the identity;
//! * **type-II**: a pair (K₁, K₂) with K₂ ≠ K₁⁻¹ satisfies
//!   K₁ U(τ) K₂ = U(τ)† at a specific τ only;
//! * or none of the above.
//!
//! Closed-form criteria (spectrum pairing, commutant geometry, double
//! commutators, quantum-order/root-space analysis, coupling-graph
//! two-coloring, Cartan involutions, dim-4 superoperator symmetries) are in
//! [`algebraic`] and [`typeii`]; Riemannian gradient flows restricted to the
//! local unitary group provide the generic numerical search in [`flows`].

pub mod algebraic;
pub mod flows;
pub mod linalg;
pub mod pauli;
pub mod tol;
pub mod typeii;

pub use flows::{Classification, Decision, FlowConfig, FlowResult, FlowVerdict, LocalUnitary, Witness};
pub use linalg::{OperatorMatrix, RoleTag};
pub use pauli::{CouplingGraph, HamiltonianSpec, PauliLetter, PauliString, WeylIndex};
