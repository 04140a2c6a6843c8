//! Ideal entangled resource states and parameterized noisy versions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{standard_gate, DensityMatrix, Gate, PureState};

/// The two locally equivalent four-qubit entangled resources.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResourceKind {
    /// |Φ_c⟩ = (|0000⟩ + |0011⟩ + |1100⟩ − |1111⟩)/2
    PhiC,
    /// The linear cluster |Φ_lin⟩ = CPHASE chain on |+⟩⊗4; equals
    /// (H⊗1⊗1⊗H)|Φ_c⟩.
    PhiLin,
}

impl ResourceKind {
    /// The ideal pure resource state.
    pub fn ideal_state(self) -> PureState {
        match self {
            ResourceKind::PhiC => build_phi_c(),
            ResourceKind::PhiLin => build_linear_cluster(),
        }
    }
}

impl std::fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ResourceKind::PhiC => write!(f, "phi-c"),
            ResourceKind::PhiLin => write!(f, "phi-lin"),
        }
    }
}

/// Noise channel applied to the ideal resource.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseSpec {
    /// The ideal, noiseless resource.
    None,
    /// p·|ψ⟩⟨ψ| + (1−p)·I/2^n — admixture of white noise with weight 1−p.
    WhiteNoise(f64),
    /// Independent per-qubit phase damping: ρ → (1−q_j)ρ + q_j σ_z ρ σ_z.
    Dephasing(Vec<f64>),
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseSpec::None => Ok(()),
            NoiseSpec::WhiteNoise(p) => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::OutOfRange(format!(
                        "white-noise weight {p} outside [0, 1]"
                    )));
                }
                Ok(())
            }
            NoiseSpec::Dephasing(qs) => {
                if qs.iter().any(|q| !(0.0..=1.0).contains(q)) {
                    return Err(Error::OutOfRange(format!(
                        "dephasing strengths {qs:?} outside [0, 1]"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Builds |Φ_c⟩ = (1/2)(|0000⟩ + |0011⟩ + |1100⟩ − |1111⟩).
pub fn build_phi_c() -> PureState {
    let mut amps = vec![Complex64::new(0.0, 0.0); 16];
    amps[0b0000] = Complex64::new(0.5, 0.0);
    amps[0b0011] = Complex64::new(0.5, 0.0);
    amps[0b1100] = Complex64::new(0.5, 0.0);
    amps[0b1111] = Complex64::new(-0.5, 0.0);
    PureState::from_amplitudes(4, amps).expect("normalized by construction")
}

/// Builds the four-qubit linear cluster: |+⟩⊗4 followed by CPHASE on the
/// pairs (1,2), (2,3), (3,4).
pub fn build_linear_cluster() -> PureState {
    let plus = PureState::plus();
    let mut state = plus.clone();
    for _ in 0..3 {
        state = state.tensor(&plus).expect("≤ 4 qubits");
    }
    let cz = standard_gate(Gate::Cphase).expect("standard gate");
    for pair in [[1, 2], [2, 3], [3, 4]] {
        state = state.apply(&cz, &pair).expect("valid targets");
    }
    state
}

/// Applies a noise model to a pure resource state, producing a density
/// matrix.
pub fn apply_noise(state: &PureState, spec: &NoiseSpec) -> Result<DensityMatrix> {
    spec.validate()?;
    let pure = DensityMatrix::from_pure(state);
    match spec {
        NoiseSpec::None => Ok(pure),
        NoiseSpec::WhiteNoise(p) => {
            let mixed = DensityMatrix::maximally_mixed(state.num_qubits())?;
            Ok(DensityMatrix::blend(&pure, *p, &mixed, 1.0 - p))
        }
        NoiseSpec::Dephasing(qs) => {
            if qs.len() != state.num_qubits() {
                return Err(Error::Dimension(format!(
                    "{} dephasing strengths for a {}-qubit state",
                    qs.len(),
                    state.num_qubits()
                )));
            }
            let z = standard_gate(Gate::Z)?;
            let mut rho = pure;
            for (idx, &q) in qs.iter().enumerate() {
                if q == 0.0 {
                    continue;
                }
                let flipped = rho.apply_unitary(&z, &[idx + 1])?;
                rho = DensityMatrix::blend(&rho, 1.0 - q, &flipped, q);
            }
            Ok(rho)
        }
    }
}

/// Inverts the white-noise fidelity relation F = p + (1−p)/16, returning the
/// weight p that reproduces the target fidelity with the ideal four-qubit
/// resource.
pub fn calibrate_white_noise(target_fidelity: f64) -> Result<f64> {
    let floor = 1.0 / 16.0;
    if !(floor..=1.0).contains(&target_fidelity) {
        return Err(Error::OutOfRange(format!(
            "target fidelity {target_fidelity} outside [{floor}, 1]"
        )));
    }
    Ok((target_fidelity - floor) / (15.0 / 16.0))
}
