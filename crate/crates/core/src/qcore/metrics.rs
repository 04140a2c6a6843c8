//! Fidelity, entanglement and distance metrics.

use num_complex::Complex64;

use super::density::DensityMatrix;
use super::state::PureState;
use crate::error::{Error, Result};

/// Overlap fidelity F = ⟨ψ|ρ|ψ⟩, clamped to [0, 1].
pub fn fidelity(rho: &DensityMatrix, psi: &PureState) -> Result<f64> {
    if rho.num_qubits() != psi.num_qubits() {
        return Err(Error::Dimension(format!(
            "fidelity between {}-qubit ρ and {}-qubit |ψ⟩",
            rho.num_qubits(),
            psi.num_qubits()
        )));
    }
    let dim = rho.dim();
    let amps = psi.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..dim {
        for c in 0..dim {
            acc += amps[r].conj() * rho.get(r, c) * amps[c];
        }
    }
    debug_assert!(acc.im.abs() < 1e-10, "fidelity not real: {acc}");
    Ok(acc.re.clamp(0.0, 1.0))
}

/// Partial transpose of a two-qubit density matrix over its second qubit.
///
/// The result is Hermitian with unit trace but may fail positivity; it is
/// returned as a raw element vector to avoid implying a valid state.
pub fn partial_transpose_second(rho: &DensityMatrix) -> Result<Vec<Complex64>> {
    if rho.num_qubits() != 2 {
        return Err(Error::Dimension(format!(
            "partial transpose defined here for 2 qubits, got {}",
            rho.num_qubits()
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); 16];
    // Index (a b) with a the first-qubit bit: ρ^{T_B}[(a b),(a' b')] = ρ[(a b'),(a' b)].
    for a in 0..2 {
        for b in 0..2 {
            for a2 in 0..2 {
                for b2 in 0..2 {
                    let r = a * 2 + b;
                    let c = a2 * 2 + b2;
                    out[r * 4 + c] = rho.get(a * 2 + b2, a2 * 2 + b);
                }
            }
        }
    }
    Ok(out)
}

/// Negativity of a two-qubit state: (‖ρ^{T_B}‖₁ − 1)/2, i.e. the absolute sum
/// of the negative eigenvalues of the partial transpose. Zero iff separable.
pub fn negativity(rho: &DensityMatrix) -> Result<f64> {
    let pt = partial_transpose_second(rho)?;
    let m = nalgebra::DMatrix::from_row_iterator(4, 4, pt);
    let eigs = m.symmetric_eigenvalues();
    let abs_sum: f64 = eigs.iter().map(|l| l.abs()).sum();
    Ok((abs_sum - 1.0) / 2.0)
}

/// Trace distance ½‖a − b‖₁ between two density matrices.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::Dimension(format!(
            "trace distance between {}- and {}-qubit states",
            a.num_qubits(),
            b.num_qubits()
        )));
    }
    let dim = a.dim();
    let diff = nalgebra::DMatrix::from_fn(dim, dim, |r, c| a.get(r, c) - b.get(r, c));
    let eigs = diff.symmetric_eigenvalues();
    Ok(0.5 * eigs.iter().map(|l| l.abs()).sum::<f64>())
}
