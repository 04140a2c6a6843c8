//! Square complex operators on 1..=4 qubits.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A dense `dim × dim` complex operator, row-major, with `dim = 2^k`.
#[derive(Clone, Debug)]
pub struct Operator {
    dim: usize,
    elems: Vec<Complex64>,
}

impl Operator {
    pub fn from_elements(dim: usize, elems: Vec<Complex64>) -> Result<Self> {
        if !dim.is_power_of_two() || dim > 16 {
            return Err(Error::Dimension(format!(
                "operator dimension {dim} is not a power of two ≤ 16"
            )));
        }
        if elems.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "expected {} elements, got {}",
                dim * dim,
                elems.len()
            )));
        }
        if elems.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Config("non-finite operator element".into()));
        }
        Ok(Self { dim, elems })
    }

    pub(crate) fn from_parts_unchecked(dim: usize, elems: Vec<Complex64>) -> Self {
        Self { dim, elems }
    }

    pub fn identity(dim: usize) -> Self {
        let mut elems = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            elems[r * dim + r] = Complex64::new(1.0, 0.0);
        }
        Self { dim, elems }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of qubits the operator acts on.
    pub fn num_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.elems[row * self.dim + col]
    }

    pub fn elements(&self) -> &[Complex64] {
        &self.elems
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "product of {}×{0} and {}×{1} operators",
                self.dim, other.dim
            )));
        }
        let d = self.dim;
        let mut elems = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.elems[r * d + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..d {
                    elems[r * d + c] += a * other.elems[k * d + c];
                }
            }
        }
        Ok(Self { dim: d, elems })
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut elems = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                elems[c * d + r] = self.elems[r * d + c].conj();
            }
        }
        Self { dim: d, elems }
    }

    /// Kronecker product `self ⊗ other`; `self` takes the more significant
    /// index bits.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let d = self.dim * other.dim;
        if d > 16 {
            return Err(Error::Dimension(format!(
                "tensor product dimension {d} exceeds 16"
            )));
        }
        let mut elems = vec![Complex64::new(0.0, 0.0); d * d];
        for ra in 0..self.dim {
            for ca in 0..self.dim {
                let a = self.elems[ra * self.dim + ca];
                for rb in 0..other.dim {
                    for cb in 0..other.dim {
                        let r = ra * other.dim + rb;
                        let c = ca * other.dim + cb;
                        elems[r * d + c] = a * other.elems[rb * other.dim + cb];
                    }
                }
            }
        }
        Ok(Self { dim: d, elems })
    }

    /// Matrix-vector product.
    pub(crate) fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(v.len(), self.dim);
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d];
        for (r, slot) in out.iter_mut().enumerate() {
            let row = &self.elems[r * d..(r + 1) * d];
            *slot = row.iter().zip(v).map(|(m, x)| m * x).sum();
        }
        out
    }

    /// Max elementwise deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let utu = self.adjoint().mul(self).expect("same dim");
        let d = self.dim;
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                let want = if r == c { 1.0 } else { 0.0 };
                let diff = (utu.elems[r * d + c] - Complex64::new(want, 0.0)).norm();
                worst = worst.max(diff);
            }
        }
        worst
    }

    /// Embeds a `k`-qubit gate acting on `targets` (1-based, distinct) into
    /// the full `2^n` space. `targets[0]` is matched with the gate's most
    /// significant index bit.
    pub fn embed(&self, targets: &[usize], n: usize) -> Result<Operator> {
        let k = self.num_qubits();
        if targets.len() != k {
            return Err(Error::Dimension(format!(
                "gate acts on {k} qubits but {} targets given",
                targets.len()
            )));
        }
        for (i, &t) in targets.iter().enumerate() {
            if t == 0 || t > n {
                return Err(Error::Dimension(format!(
                    "target qubit {t} out of range 1..={n}"
                )));
            }
            if targets[..i].contains(&t) {
                return Err(Error::Dimension(format!("duplicate target qubit {t}")));
            }
        }
        let dim = 1 << n;
        // Bit position (from the LSB) of 1-based qubit q.
        let bit = |q: usize| n - q;
        let sub_index = |full: usize| -> usize {
            let mut s = 0;
            for &t in targets {
                s = (s << 1) | ((full >> bit(t)) & 1);
            }
            s
        };
        let rest_mask: usize = {
            let mut m = dim - 1;
            for &t in targets {
                m &= !(1 << bit(t));
            }
            m
        };
        let mut elems = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            let rs = sub_index(r);
            for c in 0..dim {
                if (r & rest_mask) != (c & rest_mask) {
                    continue;
                }
                elems[r * dim + c] = self.elems[rs * self.dim + sub_index(c)];
            }
        }
        Ok(Operator { dim, elems })
    }
}
