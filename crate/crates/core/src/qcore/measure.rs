//! Single-qubit projective measurements on pure and mixed states.

use num_complex::Complex64;
use rand::Rng;

use super::density::DensityMatrix;
use super::state::PureState;
use crate::error::{Error, Result};

/// Probability below which an explicitly requested branch is rejected.
const BRANCH_FLOOR: f64 = 1e-12;

/// A single-qubit measurement basis.
///
/// `Equatorial(α)` is the basis {(|0⟩ + e^{iα}|1⟩)/√2, (|0⟩ − e^{iα}|1⟩)/√2};
/// outcome bit 0 selects the `+` element, matching the `s_j` convention.
/// `Computational` removes a qubit in the {|0⟩, |1⟩} basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeasurementBasis {
    Computational,
    Equatorial(f64),
}

impl MeasurementBasis {
    /// The two basis kets, indexed by outcome bit.
    pub fn kets(&self) -> [[Complex64; 2]; 2] {
        match *self {
            MeasurementBasis::Computational => [
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            ],
            MeasurementBasis::Equatorial(alpha) => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                let phase = Complex64::from_polar(h, alpha);
                [
                    [Complex64::new(h, 0.0), phase],
                    [Complex64::new(h, 0.0), -phase],
                ]
            }
        }
    }

    pub fn ket(&self, outcome: u8) -> Result<PureState> {
        let kets = self.kets();
        let k = kets
            .get(outcome as usize)
            .ok_or_else(|| Error::Config(format!("measurement outcome {outcome} is not a bit")))?;
        PureState::from_amplitudes(1, k.to_vec())
    }

    fn validate(&self) -> Result<()> {
        if let MeasurementBasis::Equatorial(alpha) = self {
            if !alpha.is_finite() {
                return Err(Error::Config(format!("non-finite basis angle {alpha}")));
            }
        }
        Ok(())
    }
}

fn check_target(n: usize, qubit: usize) -> Result<()> {
    if qubit == 0 || qubit > n {
        return Err(Error::Dimension(format!(
            "measured qubit {qubit} out of range 1..={n}"
        )));
    }
    if n < 2 {
        return Err(Error::Dimension(
            "cannot remove the last remaining qubit".into(),
        ));
    }
    Ok(())
}

/// Inserts bit `v` of the measured qubit (bit position `bitq` from the LSB)
/// back into a reduced index.
#[inline]
fn expand_index(rest: usize, bitq: usize, v: usize) -> usize {
    ((rest >> bitq) << (bitq + 1)) | (v << bitq) | (rest & ((1 << bitq) - 1))
}

/// Unnormalized amplitudes of the branch `⟨b|_qubit |ψ⟩`.
fn branch_amplitudes(
    state: &PureState,
    qubit: usize,
    basis: MeasurementBasis,
    outcome: u8,
) -> Vec<Complex64> {
    let n = state.num_qubits();
    let bitq = n - qubit;
    let ket = basis.kets()[outcome as usize];
    let amps = state.amplitudes();
    (0..state.dim() / 2)
        .map(|rest| {
            ket[0].conj() * amps[expand_index(rest, bitq, 0)]
                + ket[1].conj() * amps[expand_index(rest, bitq, 1)]
        })
        .collect()
}

/// Projects `state` onto the requested outcome of a measurement on `qubit`.
///
/// Returns the outcome probability and the renormalized post-measurement
/// state with the measured qubit removed (remaining qubits keep their
/// relative order). Requesting a branch with probability ≤ 1e-12 is an
/// error.
pub fn project_measure(
    state: &PureState,
    qubit: usize,
    basis: MeasurementBasis,
    outcome: u8,
) -> Result<(f64, PureState)> {
    basis.validate()?;
    check_target(state.num_qubits(), qubit)?;
    if outcome > 1 {
        return Err(Error::Config(format!("outcome {outcome} is not a bit")));
    }
    let branch = branch_amplitudes(state, qubit, basis, outcome);
    let p: f64 = branch.iter().map(|a| a.norm_sqr()).sum();
    if p <= BRANCH_FLOOR {
        return Err(Error::ImpossibleOutcome);
    }
    let scale = p.sqrt().recip();
    let post = PureState::from_parts_unchecked(
        state.num_qubits() - 1,
        branch.into_iter().map(|a| a * scale).collect(),
    );
    Ok((p, post))
}

/// Samples a measurement outcome with Born probabilities; deterministic for
/// a fixed random source.
pub fn sample_measure<R: Rng + ?Sized>(
    state: &PureState,
    qubit: usize,
    basis: MeasurementBasis,
    rng: &mut R,
) -> Result<(u8, PureState)> {
    basis.validate()?;
    check_target(state.num_qubits(), qubit)?;
    let branch0 = branch_amplitudes(state, qubit, basis, 0);
    let p0: f64 = branch0.iter().map(|a| a.norm_sqr()).sum();
    let u: f64 = rng.gen();
    if u < p0 {
        let scale = p0.sqrt().recip();
        let post = PureState::from_parts_unchecked(
            state.num_qubits() - 1,
            branch0.into_iter().map(|a| a * scale).collect(),
        );
        Ok((0, post))
    } else {
        let branch1 = branch_amplitudes(state, qubit, basis, 1);
        let p1: f64 = branch1.iter().map(|a| a.norm_sqr()).sum();
        let scale = p1.sqrt().recip();
        let post = PureState::from_parts_unchecked(
            state.num_qubits() - 1,
            branch1.into_iter().map(|a| a * scale).collect(),
        );
        Ok((1, post))
    }
}

/// Unnormalized post-measurement matrix `⟨b| ρ |b⟩` on the remaining qubits;
/// its trace is the outcome probability.
fn branch_density(
    rho: &DensityMatrix,
    qubit: usize,
    basis: MeasurementBasis,
    outcome: u8,
) -> (f64, Vec<Complex64>) {
    let n = rho.num_qubits();
    let bitq = n - qubit;
    let ket = basis.kets()[outcome as usize];
    let rd = rho.dim() / 2;
    let mut elems = vec![Complex64::new(0.0, 0.0); rd * rd];
    for r in 0..rd {
        for c in 0..rd {
            let mut acc = Complex64::new(0.0, 0.0);
            for v in 0..2 {
                for w in 0..2 {
                    acc += ket[v].conj()
                        * ket[w]
                        * rho.get(expand_index(r, bitq, v), expand_index(c, bitq, w));
                }
            }
            elems[r * rd + c] = acc;
        }
    }
    let p: f64 = (0..rd).map(|r| elems[r * rd + r].re).sum();
    (p, elems)
}

/// Density-matrix analogue of [`project_measure`].
pub fn project_measure_density(
    rho: &DensityMatrix,
    qubit: usize,
    basis: MeasurementBasis,
    outcome: u8,
) -> Result<(f64, DensityMatrix)> {
    basis.validate()?;
    check_target(rho.num_qubits(), qubit)?;
    if outcome > 1 {
        return Err(Error::Config(format!("outcome {outcome} is not a bit")));
    }
    let (p, mut elems) = branch_density(rho, qubit, basis, outcome);
    if p <= BRANCH_FLOOR {
        return Err(Error::ImpossibleOutcome);
    }
    let inv = p.recip();
    for z in &mut elems {
        *z *= inv;
    }
    Ok((
        p,
        DensityMatrix::from_parts_unchecked(rho.num_qubits() - 1, elems),
    ))
}

/// Density-matrix analogue of [`sample_measure`].
pub fn sample_measure_density<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    qubit: usize,
    basis: MeasurementBasis,
    rng: &mut R,
) -> Result<(u8, f64, DensityMatrix)> {
    basis.validate()?;
    check_target(rho.num_qubits(), qubit)?;
    let (p0, elems0) = branch_density(rho, qubit, basis, 0);
    let u: f64 = rng.gen();
    let (outcome, p, mut elems) = if u < p0 {
        (0u8, p0, elems0)
    } else {
        let (p1, elems1) = branch_density(rho, qubit, basis, 1);
        (1u8, p1, elems1)
    };
    let inv = p.recip();
    for z in &mut elems {
        *z *= inv;
    }
    Ok((
        outcome,
        p,
        DensityMatrix::from_parts_unchecked(rho.num_qubits() - 1, elems),
    ))
}
