//! Measurement programs for Deutsch's algorithm on the four-qubit cluster,
//! with adaptive feed-forward.
//!
//! A [`MeasurementProgram`] encodes which physical qubits are measured in
//! which bases, the outcome-conditioned Pauli corrections (feed-forward) on
//! the unmeasured qubits, and the fixed local rotations that map the
//! physical output frame back to the logical one. Qubit 1 carries the query
//! register |x⟩ in and out; qubit 4 is the input and qubit 3 the output of
//! the ancilla register |y⟩; qubit 2 enacts the oracle.
//!
//! The byproduct Paulis depend on the resource frame: on the linear cluster
//! the qubit-1 byproduct of the constant boxes is σ_z-type, while on the
//! locally rotated |Φ_c⟩ (Hadamards on qubits 1 and 4) it conjugates to
//! σ_x. Every program here is gated by the exhaustive branch-vs-circuit
//! equivalence checks in the test suite.

mod run;

pub use run::{
    classify, constant_probability, enumerate_branches, execute, expected_output,
    success_probability, Branch, FunctionClass, ResourceState, RunRecord,
};

use std::f64::consts::{FRAC_PI_2, PI};

use crate::cluster::ResourceKind;
use crate::error::{Error, Result};
use crate::qcore::{standard_gate, Gate, MeasurementBasis, Operator, PureState};

/// The four oracle configurations of Deutsch's algorithm on two qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlackBox {
    /// BB(i) = 1⊗1 — constant f(x) = 0.
    IdId,
    /// BB(ii) = 1⊗σ_x — constant f(x) = 1.
    IdX,
    /// BB(iii) = CNOT — balanced f(x) = x.
    Cnot,
    /// BB(iv) = (1⊗σ_x)·CNOT — balanced f(x) = 1 ⊕ x.
    XCnot,
}

impl BlackBox {
    pub const ALL: [BlackBox; 4] = [
        BlackBox::IdId,
        BlackBox::IdX,
        BlackBox::Cnot,
        BlackBox::XCnot,
    ];

    /// True for the constant-function boxes BB(i) and BB(ii).
    pub fn is_constant(self) -> bool {
        matches!(self, BlackBox::IdId | BlackBox::IdX)
    }

    /// Conventional label "BB(i)".."BB(iv)".
    pub fn label(self) -> &'static str {
        match self {
            BlackBox::IdId => "BB(i)",
            BlackBox::IdX => "BB(ii)",
            BlackBox::Cnot => "BB(iii)",
            BlackBox::XCnot => "BB(iv)",
        }
    }

    /// The ideal two-qubit output state: |+,−⟩ for constant boxes, |−,−⟩ for
    /// balanced ones (the oracle unitary applied to |+⟩|−⟩, up to phase).
    pub fn ideal_output(self) -> PureState {
        let x = if self.is_constant() {
            PureState::plus()
        } else {
            PureState::minus()
        };
        x.tensor(&PureState::minus()).expect("2 qubits")
    }
}

impl std::fmt::Display for BlackBox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// The 4×4 reference unitary of a black box (qubit 1 = control register).
pub fn oracle_unitary(bb: BlackBox) -> Operator {
    let id2 = Operator::identity(2);
    let x = standard_gate(Gate::X).expect("standard gate");
    let cnot = standard_gate(Gate::Cnot).expect("standard gate");
    let ix = id2.tensor(&x).expect("4-dim");
    match bb {
        BlackBox::IdId => Operator::identity(4),
        BlackBox::IdX => ix,
        BlackBox::Cnot => cnot,
        BlackBox::XCnot => ix.mul(&cnot).expect("4-dim"),
    }
}

/// One projective measurement of the program.
#[derive(Clone, Debug)]
pub struct ProgramStep {
    /// Cluster qubit (1-based).
    pub qubit: usize,
    pub basis: MeasurementBasis,
    /// When set, the recorded bit s_j is the negation of the raw basis
    /// outcome. Encodes basis lists printed in swapped order, e.g.
    /// {|1⟩, |0⟩}.
    pub flip_label: bool,
}

/// Pauli type available to feed-forward corrections.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliKind {
    X,
    Z,
}

impl PauliKind {
    pub fn operator(self) -> Operator {
        let gate = match self {
            PauliKind::X => Gate::X,
            PauliKind::Z => Gate::Z,
        };
        standard_gate(gate).expect("standard gate")
    }
}

/// An outcome-conditioned Pauli correction: apply `pauli` to `target` when
/// `offset ⊕ (⊕_j s_j over parity_of)` is 1. An empty parity set with
/// offset 1 is an unconditional byproduct.
#[derive(Clone, Debug)]
pub struct FeedForwardRule {
    pub target: usize,
    pub pauli: PauliKind,
    pub parity_of: Vec<usize>,
    pub offset: u8,
}

/// A fixed single-qubit rotation applied to an output qubit at the
/// feed-forward stage (also in the no-feed-forward variant).
#[derive(Clone, Debug)]
pub struct LocalCorrection {
    pub qubit: usize,
    pub gate: Operator,
}

/// A complete measurement program for one black box on one resource.
#[derive(Clone, Debug)]
pub struct MeasurementProgram {
    pub resource: ResourceKind,
    pub black_box: BlackBox,
    /// Entangling measurements, executed in order (qubits 2 and 4).
    pub steps: Vec<ProgramStep>,
    pub ff_rules: Vec<FeedForwardRule>,
    pub local_corrections: Vec<LocalCorrection>,
    /// The readout bases of the output qubits in the raw (pre-correction)
    /// physical frame, as printed in the program table. [`classify`] performs
    /// the qubit-1 readout on the corrected output state, where these bases
    /// transport to {|+⟩, |−⟩}.
    pub readouts: Vec<ProgramStep>,
}

impl MeasurementProgram {
    /// Checks the structural invariants: each cluster qubit measured at most
    /// once, feed-forward targets unmeasured, parity sets referencing
    /// measured qubits only.
    pub fn validate(&self) -> Result<()> {
        let mut measured = Vec::new();
        for step in &self.steps {
            if step.qubit == 0 || step.qubit > 4 {
                return Err(Error::Config(format!(
                    "program step on qubit {} outside 1..=4",
                    step.qubit
                )));
            }
            if measured.contains(&step.qubit) {
                return Err(Error::Config(format!(
                    "qubit {} measured more than once",
                    step.qubit
                )));
            }
            measured.push(step.qubit);
        }
        for rule in &self.ff_rules {
            if measured.contains(&rule.target) {
                return Err(Error::Config(format!(
                    "feed-forward target {} is a measured qubit",
                    rule.target
                )));
            }
            if let Some(q) = rule.parity_of.iter().find(|q| !measured.contains(q)) {
                return Err(Error::Config(format!(
                    "feed-forward parity references unmeasured qubit {q}"
                )));
            }
        }
        for corr in &self.local_corrections {
            if measured.contains(&corr.qubit) {
                return Err(Error::Config(format!(
                    "local correction on measured qubit {}",
                    corr.qubit
                )));
            }
        }
        Ok(())
    }
}

fn rz(alpha: f64) -> Operator {
    standard_gate(Gate::Rz(alpha)).expect("standard gate")
}

fn hadamard() -> Operator {
    standard_gate(Gate::H).expect("standard gate")
}

/// Builds the measurement program implementing a black box on the given
/// resource, including feed-forward and the local corrections assigned to
/// the feed-forward stage.
///
/// BB(ii) and BB(iv) reuse the BB(i)/BB(iii) patterns with one extra
/// unconditional σ_z byproduct on qubit 3, which the qubit-3 correction
/// conjugates into σ_x on the logical ancilla output.
pub fn program_for(bb: BlackBox, resource: ResourceKind) -> MeasurementProgram {
    let step = |qubit, basis, flip_label| ProgramStep {
        qubit,
        basis,
        flip_label,
    };
    let rule = |target, pauli, parity_of: &[usize], offset| FeedForwardRule {
        target,
        pauli,
        parity_of: parity_of.to_vec(),
        offset,
    };

    // Qubit-4 input preparation: B_4(π) on the linear cluster; on |Φ_c⟩ the
    // Hadamard frame turns it into the computational basis listed in swapped
    // order, i.e. s_4 labels are inverted.
    let q4 = match resource {
        ResourceKind::PhiLin => step(4, MeasurementBasis::Equatorial(PI), false),
        ResourceKind::PhiC => step(4, MeasurementBasis::Computational, true),
    };

    let constant_pattern = |bb| {
        let q2 = step(2, MeasurementBasis::Computational, false);
        let (pauli1, corrections, readout1) = match resource {
            // Byproduct on qubit 1 is Z^{s2}; read out in B_1(0).
            ResourceKind::PhiLin => (
                PauliKind::Z,
                vec![LocalCorrection {
                    qubit: 3,
                    gate: hadamard(),
                }],
                step(1, MeasurementBasis::Equatorial(0.0), false),
            ),
            // Hadamard frame on qubit 1: byproduct conjugates to X^{s2},
            // an extra H correction restores the logical frame, and the
            // readout becomes computational.
            ResourceKind::PhiC => (
                PauliKind::X,
                vec![
                    LocalCorrection {
                        qubit: 1,
                        gate: hadamard(),
                    },
                    LocalCorrection {
                        qubit: 3,
                        gate: hadamard(),
                    },
                ],
                step(1, MeasurementBasis::Computational, false),
            ),
        };
        MeasurementProgram {
            resource,
            black_box: bb,
            steps: vec![q2.clone(), q4.clone()],
            ff_rules: vec![rule(1, pauli1, &[2], 0), rule(3, PauliKind::X, &[4], 0)],
            local_corrections: corrections,
            readouts: vec![readout1, step(3, MeasurementBasis::Computational, false)],
        }
    };

    let balanced_pattern = |bb| {
        let q2 = step(2, MeasurementBasis::Equatorial(FRAC_PI_2), false);
        // Feed-forward (σ_z^{s2⊕s4})_1 (σ_x^{s4})_3 works in both frames:
        // on the rotated qubit 1 the byproduct acts within the σ_y
        // eigenbasis, where σ_z and σ_x flip the same pair.
        let (correction1, readout1) = match resource {
            ResourceKind::PhiLin => (
                rz(-FRAC_PI_2),
                step(1, MeasurementBasis::Equatorial(FRAC_PI_2), false),
            ),
            ResourceKind::PhiC => (
                rz(-FRAC_PI_2).mul(&hadamard()).expect("2-dim"),
                step(1, MeasurementBasis::Equatorial(3.0 * FRAC_PI_2), false),
            ),
        };
        MeasurementProgram {
            resource,
            black_box: bb,
            steps: vec![q2, q4.clone()],
            ff_rules: vec![
                rule(1, PauliKind::Z, &[2, 4], 0),
                rule(3, PauliKind::X, &[4], 0),
            ],
            local_corrections: vec![
                LocalCorrection {
                    qubit: 1,
                    gate: correction1,
                },
                LocalCorrection {
                    qubit: 3,
                    gate: hadamard().mul(&rz(-FRAC_PI_2)).expect("2-dim"),
                },
            ],
            readouts: vec![readout1, step(3, MeasurementBasis::Computational, false)],
        }
    };

    let mut program = match bb {
        BlackBox::IdId | BlackBox::IdX => constant_pattern(bb),
        BlackBox::Cnot | BlackBox::XCnot => balanced_pattern(bb),
    };
    if matches!(bb, BlackBox::IdX | BlackBox::XCnot) {
        program.ff_rules.push(rule(3, PauliKind::Z, &[], 1));
    }
    debug_assert!(program.validate().is_ok());
    program
}
