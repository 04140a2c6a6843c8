//! Program execution: sampled runs, exact branch enumeration and
//! classification of the oracle.

use rand::Rng;

use super::MeasurementProgram;
use crate::error::{Error, Result};
use crate::qcore::{project_measure_density, sample_measure_density, DensityMatrix, PureState};

/// Branch probabilities below this threshold are dropped from enumeration.
const BRANCH_EPS: f64 = 1e-15;

/// A resource state fed into a program: the ideal pure state or a noisy
/// density matrix.
#[derive(Clone, Debug)]
pub enum ResourceState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl ResourceState {
    pub fn num_qubits(&self) -> usize {
        match self {
            ResourceState::Pure(s) => s.num_qubits(),
            ResourceState::Mixed(r) => r.num_qubits(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            ResourceState::Pure(s) => DensityMatrix::from_pure(s),
            ResourceState::Mixed(r) => r.clone(),
        }
    }
}

impl From<PureState> for ResourceState {
    fn from(s: PureState) -> Self {
        ResourceState::Pure(s)
    }
}

impl From<DensityMatrix> for ResourceState {
    fn from(r: DensityMatrix) -> Self {
        ResourceState::Mixed(r)
    }
}

/// The record of one program run.
#[derive(Clone, Debug)]
pub struct RunRecord {
    /// Measured bits s_j keyed by cluster qubit, in measurement order.
    pub outcomes: Vec<(usize, u8)>,
    /// State of the output qubits (1, 3) after the feed-forward stage.
    pub output_state: DensityMatrix,
    pub ff_applied: bool,
}

impl RunRecord {
    pub fn outcome(&self, qubit: usize) -> Option<u8> {
        self.outcomes
            .iter()
            .find(|(q, _)| *q == qubit)
            .map(|(_, s)| *s)
    }
}

/// One exact outcome branch of a program.
#[derive(Clone, Debug)]
pub struct Branch {
    pub probability: f64,
    pub record: RunRecord,
}

/// Result of the oracle readout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionClass {
    Constant,
    Balanced,
}

impl std::fmt::Display for FunctionClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FunctionClass::Constant => write!(f, "constant"),
            FunctionClass::Balanced => write!(f, "balanced"),
        }
    }
}

/// Tracks which original cluster qubits remain and at which positions.
struct QubitMap {
    labels: Vec<usize>,
}

impl QubitMap {
    fn new(n: usize) -> Self {
        Self {
            labels: (1..=n).collect(),
        }
    }

    fn position(&self, qubit: usize) -> Result<usize> {
        self.labels
            .iter()
            .position(|&q| q == qubit)
            .map(|i| i + 1)
            .ok_or_else(|| Error::Config(format!("qubit {qubit} is not present in the register")))
    }

    fn remove(&mut self, qubit: usize) {
        self.labels.retain(|&q| q != qubit);
    }
}

fn ff_parity(rule: &super::FeedForwardRule, outcomes: &[(usize, u8)]) -> Result<u8> {
    let mut parity = rule.offset & 1;
    for q in &rule.parity_of {
        let s = outcomes
            .iter()
            .find(|(qq, _)| qq == q)
            .map(|(_, s)| *s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "feed-forward parity references unmeasured qubit {q}"
                ))
            })?;
        parity ^= s & 1;
    }
    Ok(parity)
}

/// Applies the feed-forward stage (conditioned Paulis, then the fixed local
/// corrections) and reduces to the output qubits (1, 3).
fn finish_run(
    program: &MeasurementProgram,
    mut rho: DensityMatrix,
    map: &QubitMap,
    outcomes: &[(usize, u8)],
    apply_ff: bool,
) -> Result<DensityMatrix> {
    if apply_ff {
        for rule in &program.ff_rules {
            if ff_parity(rule, outcomes)? == 1 {
                let pos = map.position(rule.target)?;
                rho = rho.apply_unitary(&rule.pauli.operator(), &[pos])?;
            }
        }
    }
    for corr in &program.local_corrections {
        let pos = map.position(corr.qubit)?;
        rho = rho.apply_unitary(&corr.gate, &[pos])?;
    }
    let out_positions: Vec<usize> = [1usize, 3]
        .iter()
        .map(|&q| map.position(q))
        .collect::<Result<_>>()?;
    if rho.num_qubits() == out_positions.len() {
        Ok(rho)
    } else {
        rho.partial_trace(&out_positions)
    }
}

fn check_resource(program: &MeasurementProgram, resource: &ResourceState) -> Result<()> {
    program.validate()?;
    if resource.num_qubits() != 4 {
        return Err(Error::Dimension(format!(
            "program expects a 4-qubit resource, got {} qubits",
            resource.num_qubits()
        )));
    }
    Ok(())
}

/// Runs the program once, sampling measurement outcomes with Born
/// probabilities. With `apply_ff` the outcome-conditioned Paulis fire before
/// the local corrections; without it only the local corrections are applied.
pub fn execute<R: Rng + ?Sized>(
    program: &MeasurementProgram,
    resource: &ResourceState,
    rng: &mut R,
    apply_ff: bool,
) -> Result<RunRecord> {
    check_resource(program, resource)?;
    let mut rho = resource.to_density();
    let mut map = QubitMap::new(4);
    let mut outcomes = Vec::with_capacity(program.steps.len());
    for step in &program.steps {
        let pos = map.position(step.qubit)?;
        let (raw, _p, post) = sample_measure_density(&rho, pos, step.basis, rng)?;
        let s = raw ^ u8::from(step.flip_label);
        outcomes.push((step.qubit, s));
        map.remove(step.qubit);
        rho = post;
    }
    let output_state = finish_run(program, rho, &map, &outcomes, apply_ff)?;
    Ok(RunRecord {
        outcomes,
        output_state,
        ff_applied: apply_ff,
    })
}

/// Enumerates every outcome branch of the program with its exact
/// probability. Probabilities sum to one; numerically empty branches
/// (p < 1e-15) are omitted.
pub fn enumerate_branches(
    program: &MeasurementProgram,
    resource: &ResourceState,
    apply_ff: bool,
) -> Result<Vec<Branch>> {
    check_resource(program, resource)?;
    struct Partial {
        probability: f64,
        rho: DensityMatrix,
        outcomes: Vec<(usize, u8)>,
    }
    let mut partials = vec![Partial {
        probability: 1.0,
        rho: resource.to_density(),
        outcomes: Vec::new(),
    }];
    let mut map = QubitMap::new(4);
    for step in &program.steps {
        let pos = map.position(step.qubit)?;
        let mut next = Vec::with_capacity(partials.len() * 2);
        for partial in &partials {
            for raw in 0..2u8 {
                let (p, post) = match project_measure_density(&partial.rho, pos, step.basis, raw) {
                    Ok(res) => res,
                    Err(Error::ImpossibleOutcome) => continue,
                    Err(e) => return Err(e),
                };
                let probability = partial.probability * p;
                if probability < BRANCH_EPS {
                    continue;
                }
                let mut outcomes = partial.outcomes.clone();
                outcomes.push((step.qubit, raw ^ u8::from(step.flip_label)));
                next.push(Partial {
                    probability,
                    rho: post,
                    outcomes,
                });
            }
        }
        map.remove(step.qubit);
        partials = next;
    }
    partials
        .into_iter()
        .map(|partial| {
            let output_state = finish_run(program, partial.rho, &map, &partial.outcomes, apply_ff)?;
            Ok(Branch {
                probability: partial.probability,
                record: RunRecord {
                    outcomes: partial.outcomes,
                    output_state,
                    ff_applied: apply_ff,
                },
            })
        })
        .collect()
}

/// Exact probability that the readout of output qubit 1 yields the logical
/// |+⟩, i.e. that [`classify`] returns `Constant`.
pub fn constant_probability(record: &RunRecord) -> Result<f64> {
    let q1 = record.output_state.partial_trace(&[1])?;
    let plus = PureState::plus();
    crate::qcore::fidelity(&q1, &plus)
}

/// Performs the readout of the query register: measures output qubit 1 of
/// the corrected output state in {|+⟩, |−⟩}, which is the tabulated
/// readout basis transported through the local corrections. |+⟩ means the
/// oracle function is constant, |−⟩ balanced.
pub fn classify<R: Rng + ?Sized>(record: &RunRecord, rng: &mut R) -> Result<FunctionClass> {
    let p_constant = constant_probability(record)?;
    Ok(if rng.gen::<f64>() < p_constant {
        FunctionClass::Constant
    } else {
        FunctionClass::Balanced
    })
}

/// Exact probability, via branch enumeration, that a run of the program
/// classifies its black box correctly.
pub fn success_probability(
    program: &MeasurementProgram,
    resource: &ResourceState,
    apply_ff: bool,
) -> Result<f64> {
    let branches = enumerate_branches(program, resource, apply_ff)?;
    let mut total = 0.0;
    for branch in &branches {
        let p_constant = constant_probability(&branch.record)?;
        let p_correct = if program.black_box.is_constant() {
            p_constant
        } else {
            1.0 - p_constant
        };
        total += branch.probability * p_correct;
    }
    Ok(total)
}

/// The output-qubit ensemble the repeated experiment tomographs.
///
/// With feed-forward this is the branch-probability-weighted average output
/// state. Without feed-forward the branches stay distinct, and the analyzed
/// state is the branch on which every recorded bit is 0, i.e. the runs
/// where no correction would have been needed.
pub fn expected_output(
    program: &MeasurementProgram,
    resource: &ResourceState,
    apply_ff: bool,
) -> Result<DensityMatrix> {
    let branches = enumerate_branches(program, resource, apply_ff)?;
    if apply_ff {
        let first = &branches
            .first()
            .ok_or(Error::ImpossibleOutcome)?
            .record
            .output_state;
        let n = first.num_qubits();
        let mut elems = vec![num_complex::Complex64::new(0.0, 0.0); first.elements().len()];
        for branch in &branches {
            for (acc, z) in elems.iter_mut().zip(branch.record.output_state.elements()) {
                *acc += z * branch.probability;
            }
        }
        Ok(DensityMatrix::from_parts_unchecked(n, elems))
    } else {
        branches
            .into_iter()
            .find(|b| b.record.outcomes.iter().all(|(_, s)| *s == 0))
            .map(|b| b.record.output_state)
            .ok_or(Error::ImpossibleOutcome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::Operator;

    fn embed_on_output(gate: &Operator, qubit: usize) -> Operator {
        gate.embed(&[qubit], 2).unwrap()
    }
    use crate::cluster::{build_linear_cluster, ResourceKind};
    use crate::mbqc::{oracle_unitary, program_for, BlackBox};
    use crate::qcore::fidelity;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ideal(resource: ResourceKind) -> ResourceState {
        ResourceState::Pure(resource.ideal_state())
    }

    #[test]
    fn constant_box_outputs_plus_minus_on_every_branch() {
        let program = program_for(BlackBox::IdId, ResourceKind::PhiLin);
        let branches = enumerate_branches(&program, &ideal(ResourceKind::PhiLin), true).unwrap();
        assert_eq!(branches.len(), 4);
        let target = BlackBox::IdId.ideal_output();
        for branch in &branches {
            assert!((branch.probability - 0.25).abs() < 1e-12);
            assert!((fidelity(&branch.record.output_state, &target).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn balanced_box_outputs_minus_minus_on_every_branch() {
        let program = program_for(BlackBox::Cnot, ResourceKind::PhiLin);
        let branches = enumerate_branches(&program, &ideal(ResourceKind::PhiLin), true).unwrap();
        let target = BlackBox::Cnot.ideal_output();
        for branch in &branches {
            assert!((branch.probability - 0.25).abs() < 1e-12);
            assert!((fidelity(&branch.record.output_state, &target).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    /// Without feed-forward the four branches of BB(i) are the frozen table
    /// |+,−⟩, |+,+⟩, |−,−⟩, |−,+⟩ keyed by (s2, s4); the (0,0) branch is
    /// the pure product state needing no correction.
    #[test]
    fn no_ff_branch_table_for_constant_box() {
        let program = program_for(BlackBox::IdId, ResourceKind::PhiLin);
        let branches = enumerate_branches(&program, &ideal(ResourceKind::PhiLin), false).unwrap();
        assert_eq!(branches.len(), 4);
        let expected = [
            ((0u8, 0u8), (PureState::plus(), PureState::minus())),
            ((0, 1), (PureState::plus(), PureState::plus())),
            ((1, 0), (PureState::minus(), PureState::minus())),
            ((1, 1), (PureState::minus(), PureState::plus())),
        ];
        for branch in &branches {
            let key = (
                branch.record.outcome(2).unwrap(),
                branch.record.outcome(4).unwrap(),
            );
            let (q1, q3) = &expected.iter().find(|(k, _)| *k == key).unwrap().1;
            let target = q1.tensor(q3).unwrap();
            assert!(
                (fidelity(&branch.record.output_state, &target).unwrap() - 1.0).abs() < 1e-10,
                "branch {key:?}"
            );
        }
    }

    #[test]
    fn no_ff_branches_differ_while_ff_branches_agree() {
        for bb in BlackBox::ALL {
            let program = program_for(bb, ResourceKind::PhiLin);
            let with_ff = enumerate_branches(&program, &ideal(ResourceKind::PhiLin), true).unwrap();
            let reference = &with_ff[0].record.output_state;
            for branch in &with_ff {
                let d =
                    crate::qcore::trace_distance(&branch.record.output_state, reference).unwrap();
                assert!(d < 1e-10);
            }
            let without =
                enumerate_branches(&program, &ideal(ResourceKind::PhiLin), false).unwrap();
            let spread = without
                .iter()
                .map(|b| {
                    crate::qcore::trace_distance(
                        &b.record.output_state,
                        &without[0].record.output_state,
                    )
                    .unwrap()
                })
                .fold(0.0f64, f64::max);
            assert!(spread > 0.1, "{bb}: no-FF branches should differ");
        }
    }

    /// Every branch output equals the circuit-model reference
    /// oracle_unitary(bb)|+⟩|−⟩ for both resources.
    #[test]
    fn pattern_matches_circuit_for_all_boxes_and_resources() {
        for bb in BlackBox::ALL {
            let reference = PureState::plus()
                .tensor(&PureState::minus())
                .unwrap()
                .apply(&oracle_unitary(bb), &[1, 2])
                .unwrap();
            for resource in [ResourceKind::PhiLin, ResourceKind::PhiC] {
                let program = program_for(bb, resource);
                let branches = enumerate_branches(&program, &ideal(resource), true).unwrap();
                let total: f64 = branches.iter().map(|b| b.probability).sum();
                assert!((total - 1.0).abs() < 1e-12);
                for branch in &branches {
                    let f = fidelity(&branch.record.output_state, &reference).unwrap();
                    assert!(
                        f >= 1.0 - 1e-10,
                        "{bb} on {resource}, branch {:?}: fidelity {f}",
                        branch.record.outcomes
                    );
                }
            }
        }
    }

    /// BB(ii)/BB(iv) logical outputs equal (1⊗σ_x) applied to the BB(i)/BB(iii)
    /// outputs.
    #[test]
    fn alternative_ff_realizes_extra_x_on_ancilla() {
        let x = crate::qcore::standard_gate(crate::qcore::Gate::X).unwrap();
        for (base, alt) in [
            (BlackBox::IdId, BlackBox::IdX),
            (BlackBox::Cnot, BlackBox::XCnot),
        ] {
            let base_out = expected_output(
                &program_for(base, ResourceKind::PhiLin),
                &ideal(ResourceKind::PhiLin),
                true,
            )
            .unwrap();
            let alt_out = expected_output(
                &program_for(alt, ResourceKind::PhiLin),
                &ideal(ResourceKind::PhiLin),
                true,
            )
            .unwrap();
            let full_x = embed_on_output(&x, 2);
            let transformed = base_out.conjugate_by(&full_x);
            let d = crate::qcore::trace_distance(&transformed, &alt_out).unwrap();
            assert!(d < 1e-10, "{base} vs {alt}: distance {d}");
        }
    }

    /// Measuring qubit 4 in B_4(π) prepares the ancilla input: the branch
    /// needing no correction carries (1 ⊗ H·R_z(π))|+⟩|+⟩ before the
    /// correction stage.
    #[test]
    fn input_preparation_identity() {
        let mut program = program_for(BlackBox::IdId, ResourceKind::PhiLin);
        program.local_corrections.clear();
        let branches = enumerate_branches(&program, &ideal(ResourceKind::PhiLin), true).unwrap();
        let h = crate::qcore::standard_gate(crate::qcore::Gate::H).unwrap();
        let rz_pi =
            crate::qcore::standard_gate(crate::qcore::Gate::Rz(std::f64::consts::PI)).unwrap();
        let prepared = PureState::plus()
            .tensor(&PureState::plus())
            .unwrap()
            .apply(&rz_pi, &[2])
            .unwrap()
            .apply(&h, &[2])
            .unwrap();
        for branch in &branches {
            let f = fidelity(&branch.record.output_state, &prepared).unwrap();
            assert!((f - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn classification_is_deterministic_on_ideal_resource() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for bb in BlackBox::ALL {
            let program = program_for(bb, ResourceKind::PhiLin);
            for _ in 0..200 {
                let record =
                    execute(&program, &ideal(ResourceKind::PhiLin), &mut rng, true).unwrap();
                let class = classify(&record, &mut rng).unwrap();
                let expected = if bb.is_constant() {
                    FunctionClass::Constant
                } else {
                    FunctionClass::Balanced
                };
                assert_eq!(class, expected, "{bb}");
            }
        }
    }

    #[test]
    fn classify_ignores_global_phase() {
        // Multiply the ideal output by a phase before building the density
        // matrix; classification probabilities are unchanged.
        let out = BlackBox::IdId.ideal_output();
        let phased = PureState::normalized(
            2,
            out.amplitudes()
                .iter()
                .map(|a| a * num_complex::Complex64::from_polar(1.0, 1.1))
                .collect(),
        )
        .unwrap();
        let record = RunRecord {
            outcomes: vec![(2, 0), (4, 0)],
            output_state: DensityMatrix::from_pure(&phased),
            ff_applied: true,
        };
        assert!((constant_probability(&record).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_resource_classifies_at_chance() {
        let program = program_for(BlackBox::IdId, ResourceKind::PhiLin);
        let mixed = ResourceState::Mixed(DensityMatrix::maximally_mixed(4).unwrap());
        let p = success_probability(&program, &mixed, true).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let branches = enumerate_branches(&program, &mixed, true).unwrap();
        for branch in &branches {
            assert!((branch.probability - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn ideal_success_probability_is_one() {
        for bb in BlackBox::ALL {
            for resource in [ResourceKind::PhiLin, ResourceKind::PhiC] {
                let program = program_for(bb, resource);
                let p = success_probability(&program, &ideal(resource), true).unwrap();
                assert!((p - 1.0).abs() < 1e-12, "{bb} on {resource}: {p}");
            }
        }
    }

    /// Measurement order is physically irrelevant: running the steps in
    /// reverse produces the same branch probabilities and outputs.
    #[test]
    fn branch_enumeration_is_order_independent() {
        let program = program_for(BlackBox::Cnot, ResourceKind::PhiLin);
        let mut reversed = program.clone();
        reversed.steps.reverse();
        let a = enumerate_branches(&program, &ideal(ResourceKind::PhiLin), true).unwrap();
        let b = enumerate_branches(&reversed, &ideal(ResourceKind::PhiLin), true).unwrap();
        assert_eq!(a.len(), b.len());
        for branch in &a {
            let key: Vec<_> = {
                let mut k = branch.record.outcomes.clone();
                k.sort();
                k
            };
            let partner = b
                .iter()
                .find(|other| {
                    let mut k = other.record.outcomes.clone();
                    k.sort();
                    k == key
                })
                .expect("matching branch");
            assert!((branch.probability - partner.probability).abs() < 1e-12);
            let d = crate::qcore::trace_distance(
                &branch.record.output_state,
                &partner.record.output_state,
            )
            .unwrap();
            assert!(d < 1e-10);
        }
    }

    /// The branch-weighted average of sampled runs converges to the exact
    /// enumeration average (law of total probability).
    #[test]
    fn sampled_runs_average_to_enumerated_mixture() {
        let program = program_for(BlackBox::IdId, ResourceKind::PhiLin);
        let resource = ResourceState::Mixed(
            crate::cluster::apply_noise(
                &build_linear_cluster(),
                &crate::cluster::NoiseSpec::WhiteNoise(0.7),
            )
            .unwrap(),
        );
        let exact = expected_output(&program, &resource, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let runs = 2000;
        let mut avg = vec![num_complex::Complex64::new(0.0, 0.0); 16];
        for _ in 0..runs {
            let record = execute(&program, &resource, &mut rng, true).unwrap();
            for (acc, z) in avg.iter_mut().zip(record.output_state.elements()) {
                *acc += z / runs as f64;
            }
        }
        let sampled = DensityMatrix::from_parts_unchecked(2, avg);
        let d = crate::qcore::trace_distance(&sampled, &exact).unwrap();
        assert!(d < 0.05, "sampling average too far from exact: {d}");
    }
}
