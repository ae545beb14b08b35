//! Variational synthesis of time-independent Hamiltonians that implement
//! multi-qubit gates.
//!
//! A target unitary (Toffoli, a four-qubit parity check, ...) is matched by
//! the natural evolution e^{-i H} of a Hamiltonian built only from
//! single-qubit fields and two-body Pauli couplings. The coupling strengths
//! are found by gradient descent on a Hilbert-Schmidt overlap cost evaluated
//! on a Trotterized circuit of the candidate Hamiltonian.
//!
//! Module map:
//! - [`linalg`]: dense complex matrices, Hermitian exp/log kernels, state
//!   vectors.
//! - [`pauli`]: interaction terms, term sets, parameter vectors, presets.
//! - [`trotter`]: circuit construction from a term set and its evaluation to
//!   a unitary.
//! - [`cost`]: overlap cost in exact-trace, exact overlap-test, and sampled
//!   overlap-test forms.
//! - [`optimize`]: shift-rule and finite-difference gradients, the descent
//!   loop, iteration traces.
//! - [`targets`]: built-in target gates and principal-generator diagnostics.

pub mod cost;
pub mod error;
pub mod linalg;
pub mod optimize;
pub mod pauli;
pub mod targets;
pub mod trotter;

mod parallel;

pub use error::{Error, Result};
pub use num_complex::Complex64;
