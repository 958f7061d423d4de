//! Random-state estimators for large quantum systems.
//!
//! Traces, densities of states, thermal averages and dynamical correlation
//! functions are obtained from expectation values in a handful of random pure
//! states, using only matrix-free operator applications. The crate also
//! carries the cross-entropy benchmarking analytics and closed-form channel
//! fidelities that rely on the same random-state moments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod error;
pub mod estimate;
pub mod exec;
pub mod fidelity;
pub mod hamiltonian;
pub mod io;
pub mod linalg;
pub mod propagate;
pub mod rng;
pub mod special;
pub mod state;
pub mod xeb;

pub use error::{Error, Result};
pub use exec::Exec;
pub use hamiltonian::{HamiltonianOperator, ObservableOperator, Operator};
pub use rng::SeedSpec;
pub use state::{RandomStateKind, StateVector};

pub use num_complex::Complex64;
