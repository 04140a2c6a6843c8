//! Desk-scale simulator and analysis toolkit for one-way (measurement-based)
//! quantum computation on four-qubit cluster states.
//!
//! The crate is organized in four layers:
//!
//! * [`qcore`] — dense complex linear algebra for up to four qubits: pure
//!   states, operators, density matrices, projective measurement and the
//!   metric primitives (fidelity, negativity, trace distance).
//! * [`cluster`] — construction of the entangled resource states and
//!   parameterized noise models applied to them.
//! * [`mbqc`] — measurement programs with adaptive feed-forward that drive
//!   Deutsch's algorithm on the cluster resource, plus exact branch
//!   enumeration and classification of the oracle function.
//! * [`tomography`] — over-complete local measurement settings, synthetic
//!   count statistics, iterative maximum-likelihood state reconstruction,
//!   Monte-Carlo error bars and the biseparability witness.
//!
//! Qubits are numbered `1..=n` throughout, with qubit 1 occupying the most
//! significant bit of a basis index, so `|q1 q2 q3 q4⟩` has index
//! `q1·8 + q2·4 + q3·2 + q4`.

pub mod cluster;
pub mod error;
pub mod mbqc;
pub mod qcore;
pub mod tomography;

pub use error::{Error, Result};
