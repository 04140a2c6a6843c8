//! The standard gate set.

use num_complex::Complex64;

use super::operator::Operator;
use crate::error::{Error, Result};

/// Gate identifiers. Single-qubit gates are 2×2, `Cnot`/`Cphase` 4×4 with the
/// first (more significant) qubit as control.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    I,
    X,
    Y,
    Z,
    H,
    /// R_z(α) = exp(−iασ_z/2) = diag(e^{−iα/2}, e^{iα/2})
    Rz(f64),
    Cnot,
    /// Shifts the relative phase of |11⟩ by π.
    Cphase,
}

/// Returns the matrix for a standard gate.
pub fn standard_gate(gate: Gate) -> Result<Operator> {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let elems = match gate {
        Gate::I => vec![o, z, z, o],
        Gate::X => vec![z, o, o, z],
        Gate::Y => vec![z, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), z],
        Gate::Z => vec![o, z, z, -o],
        Gate::H => vec![h, h, h, -h],
        Gate::Rz(alpha) => {
            if !alpha.is_finite() {
                return Err(Error::Config(format!("non-finite rotation angle {alpha}")));
            }
            let half = alpha / 2.0;
            vec![
                Complex64::from_polar(1.0, -half),
                z,
                z,
                Complex64::from_polar(1.0, half),
            ]
        }
        Gate::Cnot => vec![
            o, z, z, z, //
            z, o, z, z, //
            z, z, z, o, //
            z, z, o, z,
        ],
        Gate::Cphase => vec![
            o, z, z, z, //
            z, o, z, z, //
            z, z, o, z, //
            z, z, z, -o,
        ],
    };
    let dim = if elems.len() == 4 { 2 } else { 4 };
    Ok(Operator::from_parts_unchecked(dim, elems))
}
