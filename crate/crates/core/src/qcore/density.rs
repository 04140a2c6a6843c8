//! Density matrices: Hermitian, positive-semidefinite, trace-one operators.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::operator::Operator;
use super::state::{check_qubit_count, PureState};
use super::{TOL_EIGEN, TOL_HERMITIAN};
use crate::error::{Error, Result};

/// A mixed state of `n` qubits, stored as a dense row-major `2^n × 2^n`
/// matrix with the same qubit-1-most-significant index convention as
/// [`PureState`].
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    n: usize,
    elems: Vec<Complex64>,
}

impl DensityMatrix {
    /// Builds and fully validates a density matrix (Hermitian within 1e-10,
    /// unit trace within 1e-10, minimum eigenvalue ≥ −1e-9).
    pub fn from_elements(n: usize, elems: Vec<Complex64>) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1usize << n;
        if elems.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "expected {} elements for {} qubits, got {}",
                dim * dim,
                n,
                elems.len()
            )));
        }
        let rho = Self { n, elems };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_parts_unchecked(n: usize, elems: Vec<Complex64>) -> Self {
        Self { n, elems }
    }

    /// |ψ⟩⟨ψ| for a pure state.
    pub fn from_pure(psi: &PureState) -> Self {
        let dim = psi.dim();
        let amps = psi.amplitudes();
        let mut elems = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                elems.push(amps[r] * amps[c].conj());
            }
        }
        Self {
            n: psi.num_qubits(),
            elems,
        }
    }

    /// I / 2^n.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let dim = 1usize << n;
        let mut elems = vec![Complex64::new(0.0, 0.0); dim * dim];
        let w = 1.0 / dim as f64;
        for r in 0..dim {
            elems[r * dim + r] = Complex64::new(w, 0.0);
        }
        Ok(Self { n, elems })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.elems[row * self.dim() + col]
    }

    pub fn elements(&self) -> &[Complex64] {
        &self.elems
    }

    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|r| self.elems[r * dim + r]).sum()
    }

    /// Checks all invariants, returning a description of the first violation.
    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        for r in 0..dim {
            for c in 0..dim {
                let z = self.elems[r * dim + c];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::Config("non-finite density matrix element".into()));
                }
                let mirrored = self.elems[c * dim + r].conj();
                if (z - mirrored).norm() > TOL_HERMITIAN {
                    return Err(Error::Config(format!(
                        "not Hermitian at ({r},{c}): {z} vs {mirrored}"
                    )));
                }
            }
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TOL_HERMITIAN || tr.im.abs() > TOL_HERMITIAN {
            return Err(Error::Config(format!("trace {tr} differs from one")));
        }
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -TOL_EIGEN {
            return Err(Error::Config(format!("negative eigenvalue {min}")));
        }
        Ok(())
    }

    /// Real eigenvalues of the (Hermitian) matrix, unordered.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.to_na()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect()
    }

    pub(crate) fn to_na(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        // nalgebra is column-major; a Hermitian matrix transposes to its
        // conjugate, which has identical eigenvalues, but keep row order
        // exact anyway.
        DMatrix::from_row_iterator(dim, dim, self.elems.iter().copied())
    }

    /// Conjugates by a unitary embedded on the target qubits: U ρ U†.
    pub fn apply_unitary(&self, gate: &Operator, targets: &[usize]) -> Result<Self> {
        let full = gate.embed(targets, self.n)?;
        Ok(self.conjugate_by(&full))
    }

    pub(crate) fn conjugate_by(&self, full: &Operator) -> Self {
        let dim = self.dim();
        debug_assert_eq!(full.dim(), dim);
        // t = U ρ
        let mut t = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for k in 0..dim {
                let u = full.get(r, k);
                if u.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..dim {
                    t[r * dim + c] += u * self.elems[k * dim + c];
                }
            }
        }
        // out = t U†
        let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += t[r * dim + k] * full.get(c, k).conj();
                }
                out[r * dim + c] = acc;
            }
        }
        Self {
            n: self.n,
            elems: out,
        }
    }

    /// Convex mixture Σ w_i ρ_i. Weights must be nonnegative and sum to one
    /// within 1e-12.
    pub fn mix(components: &[(f64, &Self)]) -> Result<Self> {
        let (first_w, first) = components
            .first()
            .ok_or_else(|| Error::Dimension("empty mixture".into()))?;
        if components.iter().any(|(w, _)| *w < 0.0 || !w.is_finite()) {
            return Err(Error::OutOfRange(
                "mixture weights must be nonnegative".into(),
            ));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::OutOfRange(format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        let mut out = Self {
            n: first.n,
            elems: first.elems.iter().map(|z| z * *first_w).collect(),
        };
        for (w, rho) in &components[1..] {
            if rho.n != out.n {
                return Err(Error::Dimension(
                    "mixture components differ in qubit count".into(),
                ));
            }
            for (acc, z) in out.elems.iter_mut().zip(&rho.elems) {
                *acc += z * *w;
            }
        }
        Ok(out)
    }

    /// w_a·a + w_b·b, elementwise.
    pub(crate) fn blend(a: &Self, wa: f64, b: &Self, wb: f64) -> Self {
        debug_assert_eq!(a.n, b.n);
        let elems = a
            .elems
            .iter()
            .zip(&b.elems)
            .map(|(x, y)| x * wa + y * wb)
            .collect();
        Self { n: a.n, elems }
    }

    /// Reduced density matrix on the kept qubits (1-based, in original
    /// relative order); the remaining qubits are traced out.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::Dimension("empty keep set in partial trace".into()));
        }
        let mut keep_sorted = keep.to_vec();
        keep_sorted.sort_unstable();
        keep_sorted.dedup();
        if keep_sorted.len() != keep.len() {
            return Err(Error::Dimension("duplicate qubits in keep set".into()));
        }
        if keep_sorted.iter().any(|&q| q == 0 || q > self.n) {
            return Err(Error::Dimension(format!(
                "keep set {keep_sorted:?} out of range 1..={}",
                self.n
            )));
        }
        let traced: Vec<usize> = (1..=self.n).filter(|q| !keep_sorted.contains(q)).collect();
        let k = keep_sorted.len();
        let kd = 1usize << k;
        let td = 1usize << traced.len();
        let bit = |q: usize| self.n - q;
        // Full index from (kept bits, traced bits).
        let assemble = |kept_idx: usize, traced_idx: usize| -> usize {
            let mut full = 0usize;
            for (slot, &q) in keep_sorted.iter().enumerate() {
                full |= ((kept_idx >> (k - 1 - slot)) & 1) << bit(q);
            }
            for (slot, &q) in traced.iter().enumerate() {
                full |= ((traced_idx >> (traced.len() - 1 - slot)) & 1) << bit(q);
            }
            full
        };
        let dim = self.dim();
        let mut elems = vec![Complex64::new(0.0, 0.0); kd * kd];
        for r in 0..kd {
            for c in 0..kd {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..td {
                    acc += self.elems[assemble(r, t) * dim + assemble(c, t)];
                }
                elems[r * kd + c] = acc;
            }
        }
        Ok(Self { n: k, elems })
    }
}
