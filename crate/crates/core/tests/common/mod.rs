//! Independent reference engine for the integration and acceptance tests.
//!
//! Everything here re-derives its linear algebra with nalgebra primitives —
//! Kronecker products, explicit contraction matrices and dense
//! conjugations — so that agreement with the library is a genuine
//! cross-check of two arithmetic paths, not a tautology. Program *data*
//! (bases, feed-forward rules, correction gates) is shared; the execution
//! engines are disjoint.
#![allow(dead_code)] // shared between several test binaries

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oneway_core::mbqc::{MeasurementProgram, PauliKind};
use oneway_core::qcore::{DensityMatrix, MeasurementBasis, Operator};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn na_from_density(rho: &DensityMatrix) -> CMat {
    CMat::from_row_iterator(rho.dim(), rho.dim(), rho.elements().iter().copied())
}

pub fn na_from_operator(op: &Operator) -> CMat {
    CMat::from_row_iterator(op.dim(), op.dim(), op.elements().iter().copied())
}

pub fn na_from_pure(amps: &[Complex64]) -> CVec {
    CVec::from_iterator(amps.len(), amps.iter().copied())
}

pub fn eye(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// The two basis kets, re-derived from the basis definition.
pub fn basis_kets(basis: &MeasurementBasis) -> [CVec; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match basis {
        MeasurementBasis::Computational => [
            CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]),
            CVec::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]),
        ],
        MeasurementBasis::Equatorial(alpha) => {
            let phase = Complex64::from_polar(h, *alpha);
            [
                CVec::from_vec(vec![c(h, 0.0), phase]),
                CVec::from_vec(vec![c(h, 0.0), -phase]),
            ]
        }
    }
}

pub fn pauli_matrix(p: PauliKind) -> CMat {
    match p {
        PauliKind::X => CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        PauliKind::Z => CMat::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
    }
}

/// 1 ⊗ ... ⊗ g ⊗ ... ⊗ 1 with g at 1-based position `pos` of `k` qubits.
pub fn embed_single(g: &CMat, pos: usize, k: usize) -> CMat {
    let left = eye(1 << (pos - 1));
    let right = eye(1 << (k - pos));
    left.kronecker(g).kronecker(&right)
}

/// ⟨b| at position `pos` of `k` qubits, as a (2^(k−1) × 2^k) contraction.
pub fn contraction(bra_of: &CVec, pos: usize, k: usize) -> CMat {
    let bra = CMat::from_fn(1, 2, |_, j| bra_of[j].conj());
    let left = eye(1 << (pos - 1));
    let right = eye(1 << (k - pos));
    left.kronecker(&bra).kronecker(&right)
}

pub fn born(rho: &CMat, ket: &CVec) -> f64 {
    (ket.adjoint() * rho * ket)[(0, 0)].re
}

/// One branch of the reference execution.
pub struct OracleBranch {
    pub probability: f64,
    pub outcomes: Vec<(usize, u8)>,
    pub output: CMat,
}

/// Executes a measurement program on a 4-qubit density matrix with the
/// reference engine, enumerating every outcome branch exactly.
pub fn oracle_enumerate(
    program: &MeasurementProgram,
    rho4: &CMat,
    apply_ff: bool,
) -> Vec<OracleBranch> {
    struct Partial {
        probability: f64,
        rho: CMat,
        labels: Vec<usize>,
        outcomes: Vec<(usize, u8)>,
    }
    let mut partials = vec![Partial {
        probability: 1.0,
        rho: rho4.clone(),
        labels: (1..=4).collect(),
        outcomes: Vec::new(),
    }];
    for step in &program.steps {
        let mut next = Vec::new();
        for partial in partials {
            let pos = partial
                .labels
                .iter()
                .position(|&q| q == step.qubit)
                .unwrap()
                + 1;
            let k = partial.labels.len();
            let kets = basis_kets(&step.basis);
            for (raw, ket) in kets.iter().enumerate() {
                let contraction = contraction(ket, pos, k);
                let reduced = &contraction * &partial.rho * contraction.adjoint();
                let p = reduced.diagonal().iter().map(|z| z.re).sum::<f64>();
                if p < 1e-15 {
                    continue;
                }
                let mut outcomes = partial.outcomes.clone();
                outcomes.push((step.qubit, raw as u8 ^ u8::from(step.flip_label)));
                let mut labels = partial.labels.clone();
                labels.retain(|&q| q != step.qubit);
                next.push(Partial {
                    probability: partial.probability * p,
                    rho: reduced / c(p, 0.0),
                    labels,
                    outcomes,
                });
            }
        }
        partials = next;
    }
    partials
        .into_iter()
        .map(|partial| {
            let k = partial.labels.len();
            let mut rho = partial.rho;
            if apply_ff {
                for rule in &program.ff_rules {
                    let mut parity = rule.offset;
                    for q in &rule.parity_of {
                        parity ^= partial
                            .outcomes
                            .iter()
                            .find(|(qq, _)| qq == q)
                            .map(|(_, s)| *s)
                            .unwrap();
                    }
                    if parity & 1 == 1 {
                        let pos = partial
                            .labels
                            .iter()
                            .position(|&q| q == rule.target)
                            .unwrap()
                            + 1;
                        let u = embed_single(&pauli_matrix(rule.pauli), pos, k);
                        rho = &u * rho * u.adjoint();
                    }
                }
            }
            for corr in &program.local_corrections {
                let pos = partial
                    .labels
                    .iter()
                    .position(|&q| q == corr.qubit)
                    .unwrap()
                    + 1;
                let u = embed_single(&na_from_operator(&corr.gate), pos, k);
                rho = &u * rho * u.adjoint();
            }
            OracleBranch {
                probability: partial.probability,
                outcomes: partial.outcomes,
                output: rho,
            }
        })
        .collect()
}

/// A reproducible full-rank random density matrix: normalized Ginibre draw
/// mixed with 15% of the maximally mixed state.
pub fn random_density(n: usize, seed: u64) -> DensityMatrix {
    let dim = 1usize << n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = CMat::from_fn(dim, dim, |_, _| {
        c(
            rng.sample(rand_distr::StandardNormal),
            rng.sample(rand_distr::StandardNormal),
        )
    });
    let gg = &g * g.adjoint();
    let trace: f64 = gg.diagonal().iter().map(|z| z.re).sum();
    let mixed = gg / c(trace / 0.85, 0.0) + eye(dim) * c(0.15 / dim as f64, 0.0);
    let elems: Vec<Complex64> = (0..dim)
        .flat_map(|r| (0..dim).map(move |c| (r, c)))
        .map(|(r, col)| mixed[(r, col)])
        .collect();
    DensityMatrix::from_elements(n, elems).expect("valid by construction")
}

/// Draws a Haar-ish random pure product of single-qubit states; handy for
/// property-style sweeps.
pub fn random_unit_vector(dim: usize, rng: &mut ChaCha8Rng) -> CVec {
    loop {
        let v = CVec::from_fn(dim, |_, _| {
            c(
                rng.sample(rand_distr::StandardNormal),
                rng.sample(rand_distr::StandardNormal),
            )
        });
        let norm = v.norm();
        if norm > 1e-6 {
            return v / c(norm, 0.0);
        }
    }
}

/// Serializes access to wall-clock-sensitive acceptance sections so the
/// timing bounds are not distorted by parallel test scheduling.
pub fn timing_lock() -> std::sync::MutexGuard<'static, ()> {
    use std::sync::{Mutex, OnceLock};
    static LOCK: OnceLock<Mutex<()>> = OnceLock::new();
    LOCK.get_or_init(|| Mutex::new(()))
        .lock()
        .unwrap_or_else(|poisoned| poisoned.into_inner())
}
