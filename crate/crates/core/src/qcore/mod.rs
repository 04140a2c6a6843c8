//! Dense complex linear algebra for up to four qubits.
//!
//! States and operators are stored as flat `Vec<Complex64>` with basis index
//! `Σ_j q_j · 2^(n−j)`, i.e. qubit 1 is the most significant bit. All values
//! are immutable after construction; every operation returns a fresh value.

mod density;
mod gates;
mod measure;
mod metrics;
mod operator;
mod state;

pub use density::DensityMatrix;
pub use gates::{standard_gate, Gate};
pub use measure::{
    project_measure, project_measure_density, sample_measure, sample_measure_density,
    MeasurementBasis,
};
pub use metrics::{fidelity, negativity, partial_transpose_second, trace_distance};
pub use operator::Operator;
pub use state::{overlap, PureState};

/// Tolerance for algebraic identities (norms, unitarity, completeness).
pub const TOL_ALGEBRAIC: f64 = 1e-12;
/// Tolerance for Hermiticity and trace checks on density matrices.
pub const TOL_HERMITIAN: f64 = 1e-10;
/// Tolerance for eigenvalue-based quantities (positivity checks).
pub const TOL_EIGEN: f64 = 1e-9;
