//! Normalized pure states of 1..=4 qubits.

use num_complex::Complex64;

use super::operator::Operator;
use super::TOL_ALGEBRAIC;
use crate::error::{Error, Result};

/// A normalized complex amplitude vector over `n` qubits.
///
/// The basis index of `|q1 q2 .. qn⟩` is `Σ_j q_j · 2^(n−j)`: qubit 1 is the
/// most significant bit.
#[derive(Clone, Debug)]
pub struct PureState {
    n: usize,
    amps: Vec<Complex64>,
}

pub(crate) fn check_qubit_count(n: usize) -> Result<()> {
    if !(1..=4).contains(&n) {
        return Err(Error::Config(format!("qubit count {n} outside 1..=4")));
    }
    Ok(())
}

impl PureState {
    /// Builds a state from raw amplitudes, checking length, finiteness and
    /// normalization (Σ|a|² = 1 within 1e-12).
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_qubit_count(n)?;
        if amps.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "expected {} amplitudes for {} qubits, got {}",
                1 << n,
                n,
                amps.len()
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Config("non-finite amplitude".into()));
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > TOL_ALGEBRAIC {
            return Err(Error::Config(format!(
                "state not normalized: Σ|a|² = {norm_sq}"
            )));
        }
        Ok(Self { n, amps })
    }

    /// Builds a state from unnormalized amplitudes by rescaling.
    pub fn normalized(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq <= TOL_ALGEBRAIC {
            return Err(Error::Config(
                "cannot normalize a (near-)zero vector".into(),
            ));
        }
        let scale = norm_sq.sqrt().recip();
        let amps = amps.into_iter().map(|a| a * scale).collect();
        Self::from_amplitudes(n, amps)
    }

    pub(crate) fn from_parts_unchecked(n: usize, amps: Vec<Complex64>) -> Self {
        Self { n, amps }
    }

    /// The computational basis state with the given index.
    pub fn basis_state(n: usize, index: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1 << n;
        if index >= dim {
            return Err(Error::Dimension(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// |0⟩
    pub fn zero() -> Self {
        Self::basis_state(1, 0).expect("valid")
    }

    /// |1⟩
    pub fn one() -> Self {
        Self::basis_state(1, 1).expect("valid")
    }

    /// |+⟩ = (|0⟩ + |1⟩)/√2
    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_parts_unchecked(1, vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)])
    }

    /// |−⟩ = (|0⟩ − |1⟩)/√2
    pub fn minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_parts_unchecked(1, vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)])
    }

    /// |R⟩ = (|0⟩ + i|1⟩)/√2, the +1 eigenstate of σ_y.
    pub fn y_plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_parts_unchecked(1, vec![Complex64::new(h, 0.0), Complex64::new(0.0, h)])
    }

    /// |L⟩ = (|0⟩ − i|1⟩)/√2, the −1 eigenstate of σ_y.
    pub fn y_minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_parts_unchecked(1, vec![Complex64::new(h, 0.0), Complex64::new(0.0, -h)])
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    /// Squared norm; 1 within 1e-12 for any constructed state.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Kronecker product `self ⊗ other`; `self`'s qubits become the more
    /// significant ones.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        check_qubit_count(self.n + other.n)?;
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(Self {
            n: self.n + other.n,
            amps,
        })
    }

    /// Applies a `k`-qubit gate to the listed target qubits (1-based). Gate
    /// slot 0 acts on `targets[0]`, which plays the most significant role in
    /// the gate's own index ordering.
    pub fn apply(&self, gate: &Operator, targets: &[usize]) -> Result<Self> {
        let full = gate.embed(targets, self.n)?;
        let amps = full.mul_vec(&self.amps);
        Ok(Self { n: self.n, amps })
    }

    /// Inner product ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "inner product between {}- and {}-qubit states",
                self.n, other.n
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// |⟨a|b⟩| — state overlap, insensitive to global phase.
pub fn overlap(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(a.inner(b)?.norm())
}
