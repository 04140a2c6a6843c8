//! Iterative maximum-likelihood reconstruction (diluted RρR fixed point).

use num_complex::Complex64;

use super::counts::CountTable;
use crate::error::{Error, Result};
use crate::qcore::DensityMatrix;

/// Tuning knobs of the reconstruction. The defaults implement the diluted
/// update ρ ← N[(I + εR)ρ(I + εR)], stopping when the log-likelihood
/// improves by less than 1e-10 for three consecutive iterations (or at 5000
/// iterations).
///
/// The default dilution ε = 1 keeps the update monotone in the likelihood
/// on this problem family while converging within the iteration cap; at
/// four qubits, ε around 0.1 contracts the slowest spectral modes so weakly
/// that 5000 iterations end an order of magnitude short of the fixed point.
#[derive(Clone, Debug)]
pub struct MleOptions {
    pub epsilon: f64,
    pub max_iterations: usize,
    pub plateau_tolerance: f64,
    pub plateau_window: usize,
    /// Born probabilities are floored at this value inside R(ρ) to avoid
    /// division blowup on boundary states.
    pub probability_floor: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            max_iterations: 5000,
            plateau_tolerance: 1e-10,
            plateau_window: 3,
            probability_floor: 1e-12,
        }
    }
}

/// Outcome of a reconstruction.
#[derive(Clone, Debug)]
pub struct MleResult {
    pub rho: DensityMatrix,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Reconstructs the maximum-likelihood state from a count table with the
/// default options.
pub fn mle_reconstruct(counts: &CountTable) -> Result<MleResult> {
    mle_reconstruct_with(counts, &MleOptions::default())
}

/// Reconstruction with explicit options.
pub fn mle_reconstruct_with(counts: &CountTable, opts: &MleOptions) -> Result<MleResult> {
    run_mle(counts, opts).map(|(result, _)| result)
}

/// Core loop, also returning the log-likelihood trace for diagnostics.
///
/// Both the Born probabilities of all 6^n projectors and the operator
/// R(ρ) = Σ_k (f_k/p_k)Π_k are evaluated through a tree of single-qubit
/// basis rotations: settings sharing an axis prefix share the partially
/// rotated matrix, which cuts the per-iteration work from 3^n·4^n to
/// roughly (3 + 9 + ... + 3^n)·4^n/3^(n-1) single-qubit conjugations.
pub(crate) fn run_mle(counts: &CountTable, opts: &MleOptions) -> Result<(MleResult, Vec<f64>)> {
    let plan = counts.plan();
    let n = plan.num_qubits();
    let dim = plan.dim();
    let total = counts.total();
    if total <= 0.0 {
        return Err(Error::Estimation("count table is all zero".into()));
    }
    if opts.epsilon <= 0.0 || !opts.epsilon.is_finite() {
        return Err(Error::OutOfRange(format!(
            "dilution ε = {} must be positive",
            opts.epsilon
        )));
    }

    // Normalized frequencies f_k over all projectors.
    let freqs: Vec<f64> = counts.counts().iter().map(|c| c / total).collect();

    // Per-axis bra matrices: row o of W holds the conjugated eigenket of
    // outcome o, so that (W ρ W†)_oo is the Born probability.
    let bras: Vec<[Complex64; 4]> = super::Axis::ALL
        .iter()
        .map(|axis| {
            let kets = axis.eigenkets();
            [
                kets[0][0].conj(),
                kets[0][1].conj(),
                kets[1][0].conj(),
                kets[1][1].conj(),
            ]
        })
        .collect();
    let bras_adj: Vec<[Complex64; 4]> = bras
        .iter()
        .map(|w| [w[0].conj(), w[2].conj(), w[1].conj(), w[3].conj()])
        .collect();

    // Rotation tree: level l holds 3^l matrices, one per axis prefix.
    let mut levels: Vec<Vec<Complex64>> = (0..=n)
        .map(|l| vec![Complex64::new(0.0, 0.0); 3usize.pow(l as u32) * dim * dim])
        .collect();

    // ρ₀ = I / 2^n.
    let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
    for r in 0..dim {
        rho[r * dim + r] = Complex64::new(1.0 / dim as f64, 0.0);
    }

    let mut trace_log = Vec::new();
    let mut prev_log_like = f64::NEG_INFINITY;
    let mut plateau_streak = 0usize;
    let mut converged = false;
    let mut iterations = 0usize;
    let mut log_like = f64::NEG_INFINITY;

    let mut tmp = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut next = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mat = dim * dim;

    for iter in 0..=opts.max_iterations {
        // Forward pass: rotate ρ into every setting's product eigenbasis;
        // the diagonal of each leaf holds the outcome probabilities.
        levels[0].copy_from_slice(&rho);
        for l in 0..n {
            let bit = n - 1 - l;
            let (parents, children) = {
                let (a, b) = levels.split_at_mut(l + 1);
                (&a[l], &mut b[0])
            };
            for parent in 0..3usize.pow(l as u32) {
                let src = &parents[parent * mat..(parent + 1) * mat];
                for (axis, bra) in bras.iter().enumerate() {
                    let child = parent * 3 + axis;
                    let dst = &mut children[child * mat..(child + 1) * mat];
                    conjugate_qubit(src, dst, bit, bra, dim);
                }
            }
        }

        // Log-likelihood Σ n_k ln p_k of the current iterate.
        log_like = 0.0;
        let leaves = &levels[n];
        for s in 0..plan.num_settings() {
            let leaf = &leaves[s * mat..(s + 1) * mat];
            for o in 0..dim {
                let n_k = counts.counts()[s * dim + o];
                if n_k > 0.0 {
                    let p = leaf[o * dim + o].re.max(opts.probability_floor);
                    log_like += n_k * p.ln();
                }
            }
        }
        trace_log.push(log_like);

        let improvement = log_like - prev_log_like;
        prev_log_like = log_like;
        if improvement.abs() < opts.plateau_tolerance {
            plateau_streak += 1;
            if plateau_streak >= opts.plateau_window {
                converged = true;
                iterations = iter;
                break;
            }
        } else {
            plateau_streak = 0;
        }
        if iter == opts.max_iterations {
            iterations = iter;
            break;
        }

        // Backward pass: overwrite each leaf with diag(f_k/p_k) in its own
        // basis and accumulate R = Σ_s W_s† diag(w_s) W_s back down the
        // tree. Unobserved projectors contribute weight zero.
        {
            let leaves = &mut levels[n];
            for s in 0..plan.num_settings() {
                let leaf = &mut leaves[s * mat..(s + 1) * mat];
                for o in 0..dim {
                    let p = leaf[o * dim + o].re.max(opts.probability_floor);
                    let f_k = freqs[s * dim + o];
                    let w = if f_k > 0.0 { f_k / p } else { 0.0 };
                    leaf[o * dim + o] = Complex64::new(w, 0.0);
                    for c in 0..dim {
                        if c != o {
                            leaf[o * dim + c] = Complex64::new(0.0, 0.0);
                        }
                    }
                }
            }
        }
        for l in (0..n).rev() {
            let bit = n - 1 - l;
            let (parents, children) = {
                let (a, b) = levels.split_at_mut(l + 1);
                (&mut a[l], &b[0])
            };
            for parent in 0..3usize.pow(l as u32) {
                let dst = &mut parents[parent * mat..(parent + 1) * mat];
                dst.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
                for (axis, bra_adj) in bras_adj.iter().enumerate() {
                    let child = parent * 3 + axis;
                    let src = &children[child * mat..(child + 1) * mat];
                    conjugate_qubit_accumulate(src, dst, bit, bra_adj, dim);
                }
            }
        }

        // T = I + εR (Hermitian), then ρ ← T ρ T renormalized.
        let r_op = &mut levels[0];
        for r in 0..dim {
            for c in 0..dim {
                let mut t = r_op[r * dim + c] * opts.epsilon;
                if r == c {
                    t += 1.0;
                }
                r_op[r * dim + c] = t;
            }
        }
        mat_mul(r_op, &rho, &mut tmp, dim);
        mat_mul(&tmp, r_op, &mut next, dim);
        // Hermitize against rounding drift and renormalize the trace.
        let mut trace = 0.0f64;
        for r in 0..dim {
            trace += next[r * dim + r].re;
        }
        let inv = trace.recip();
        for r in 0..dim {
            for c in 0..=r {
                let avg = (next[r * dim + c] + next[c * dim + r].conj()) * (0.5 * inv);
                rho[r * dim + c] = avg;
                rho[c * dim + r] = avg.conj();
            }
        }
    }

    let rho = DensityMatrix::from_parts_unchecked(plan.num_qubits(), rho);
    rho.validate()
        .map_err(|e| Error::Estimation(format!("reconstruction left the physical set: {e}")))?;
    Ok((
        MleResult {
            rho,
            log_likelihood: log_like,
            iterations,
            converged,
        },
        trace_log,
    ))
}

/// dst = M src M† with M = 1 ⊗ m ⊗ 1 acting on the given bit; `m` is 2×2
/// row-major.
fn conjugate_qubit(
    src: &[Complex64],
    dst: &mut [Complex64],
    bit: usize,
    m: &[Complex64; 4],
    dim: usize,
) {
    let mask = 1usize << bit;
    // Left multiplication into dst.
    for r0 in 0..dim {
        if r0 & mask != 0 {
            continue;
        }
        let r1 = r0 | mask;
        for c in 0..dim {
            let a = src[r0 * dim + c];
            let b = src[r1 * dim + c];
            dst[r0 * dim + c] = m[0] * a + m[1] * b;
            dst[r1 * dim + c] = m[2] * a + m[3] * b;
        }
    }
    // Right multiplication by m† in place.
    for r in 0..dim {
        let row = &mut dst[r * dim..(r + 1) * dim];
        for c0 in 0..dim {
            if c0 & mask != 0 {
                continue;
            }
            let c1 = c0 | mask;
            let a = row[c0];
            let b = row[c1];
            row[c0] = a * m[0].conj() + b * m[1].conj();
            row[c1] = a * m[2].conj() + b * m[3].conj();
        }
    }
}

/// acc += M src M†, same conventions as [`conjugate_qubit`].
fn conjugate_qubit_accumulate(
    src: &[Complex64],
    acc: &mut [Complex64],
    bit: usize,
    m: &[Complex64; 4],
    dim: usize,
) {
    let mask = 1usize << bit;
    for r0 in 0..dim {
        if r0 & mask != 0 {
            continue;
        }
        let r1 = r0 | mask;
        for c0 in 0..dim {
            if c0 & mask != 0 {
                continue;
            }
            let c1 = c0 | mask;
            // Left-multiplied pair of the two relevant rows, then the right
            // factor applied to the (c0, c1) column pair.
            let a00 = src[r0 * dim + c0];
            let a01 = src[r0 * dim + c1];
            let a10 = src[r1 * dim + c0];
            let a11 = src[r1 * dim + c1];
            let l00 = m[0] * a00 + m[1] * a10;
            let l01 = m[0] * a01 + m[1] * a11;
            let l10 = m[2] * a00 + m[3] * a10;
            let l11 = m[2] * a01 + m[3] * a11;
            acc[r0 * dim + c0] += l00 * m[0].conj() + l01 * m[1].conj();
            acc[r0 * dim + c1] += l00 * m[2].conj() + l01 * m[3].conj();
            acc[r1 * dim + c0] += l10 * m[0].conj() + l11 * m[1].conj();
            acc[r1 * dim + c1] += l10 * m[2].conj() + l11 * m[3].conj();
        }
    }
}

fn mat_mul(a: &[Complex64], b: &[Complex64], out: &mut [Complex64], dim: usize) {
    out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
    for r in 0..dim {
        for k in 0..dim {
            let av = a[r * dim + k];
            if av.re == 0.0 && av.im == 0.0 {
                continue;
            }
            let brow = &b[k * dim..(k + 1) * dim];
            let orow = &mut out[r * dim..(r + 1) * dim];
            for (o, bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::build_phi_c;
    use crate::qcore::{fidelity, trace_distance, DensityMatrix};
    use crate::tomography::{expected_counts, settings_plan, simulate_counts, CountMode};

    #[test]
    fn reconstructs_cluster_state_from_large_sample() {
        let plan = settings_plan(4).unwrap();
        let target = build_phi_c();
        let rho = DensityMatrix::from_pure(&target);
        let table = simulate_counts(&rho, &plan, 10_000, 21, CountMode::Multinomial).unwrap();
        let result = mle_reconstruct(&table).unwrap();
        let f = fidelity(&result.rho, &target).unwrap();
        assert!(f >= 0.99, "fidelity {f}");
    }

    #[test]
    fn exact_frequencies_recover_the_truth() {
        let plan = settings_plan(2).unwrap();
        // A fixed full-rank two-qubit state.
        let psi = crate::qcore::PureState::normalized(
            2,
            vec![
                Complex64::new(0.6, 0.1),
                Complex64::new(-0.2, 0.3),
                Complex64::new(0.4, -0.2),
                Complex64::new(0.1, 0.5),
            ],
        )
        .unwrap();
        let truth = DensityMatrix::blend(
            &DensityMatrix::from_pure(&psi),
            0.7,
            &DensityMatrix::maximally_mixed(2).unwrap(),
            0.3,
        );
        let table = expected_counts(&truth, &plan, 1000).unwrap();
        let result = mle_reconstruct(&table).unwrap();
        let d = trace_distance(&result.rho, &truth).unwrap();
        assert!(d < 1e-4, "trace distance {d}");
        assert!(result.converged);
    }

    #[test]
    fn maximally_mixed_counts_reconstruct_to_low_cluster_fidelity() {
        let plan = settings_plan(4).unwrap();
        let rho = DensityMatrix::maximally_mixed(4).unwrap();
        let table = simulate_counts(&rho, &plan, 2000, 4, CountMode::Multinomial).unwrap();
        let result = mle_reconstruct(&table).unwrap();
        let f = fidelity(&result.rho, &build_phi_c()).unwrap();
        assert!((f - 0.0625).abs() < 0.02, "fidelity {f}");
    }

    #[test]
    fn log_likelihood_is_monotone() {
        let plan = settings_plan(2).unwrap();
        let rho = DensityMatrix::from_pure(
            &crate::qcore::PureState::plus()
                .tensor(&crate::qcore::PureState::minus())
                .unwrap(),
        );
        let table = simulate_counts(&rho, &plan, 500, 13, CountMode::Multinomial).unwrap();
        let (result, trace) = run_mle(&table, &MleOptions::default()).unwrap();
        assert!(result.iterations > 0);
        for pair in trace.windows(2) {
            assert!(
                pair[1] >= pair[0] - 1e-12,
                "log-likelihood decreased: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }

    /// Monotonicity must survive the default dilution on unruly data:
    /// near-pure targets, heavy noise, Poisson tables, both register sizes.
    /// The slack per step is rounding-level relative to the likelihood
    /// magnitude.
    #[test]
    fn log_likelihood_is_monotone_across_corpus() {
        use rand::{Rng, SeedableRng};
        let plan4 = settings_plan(4).unwrap();
        let plan2 = settings_plan(2).unwrap();
        let opts = MleOptions {
            max_iterations: 400,
            ..MleOptions::default()
        };
        let check = |table: &CountTable, label: &str| {
            let (_, trace) = run_mle(table, &opts).unwrap();
            for (i, pair) in trace.windows(2).enumerate() {
                let slack = 1e-12 + 4.0 * f64::EPSILON * pair[0].abs();
                assert!(
                    pair[1] >= pair[0] - slack,
                    "{label}: step {i} decreased {} -> {}",
                    pair[0],
                    pair[1]
                );
            }
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for seed in 0..8u64 {
            let pure4 = DensityMatrix::from_pure(&build_phi_c());
            let noisy4 = DensityMatrix::blend(
                &pure4,
                0.6,
                &DensityMatrix::maximally_mixed(4).unwrap(),
                0.4,
            );
            for (rho, tag) in [(&pure4, "pure4"), (&noisy4, "noisy4")] {
                for shots in [50u64, 500] {
                    let t =
                        simulate_counts(rho, &plan4, shots, seed, CountMode::Multinomial).unwrap();
                    check(&t, &format!("{tag}/N={shots}/seed={seed}"));
                }
            }
            let counts2: Vec<f64> = (0..plan2.num_projectors())
                .map(|_| f64::from(rng.gen_range(0u32..40)))
                .collect();
            if counts2.iter().sum::<f64>() > 0.0 {
                let t = CountTable::from_parts(plan2.clone(), 40, CountMode::Poisson, 0, counts2)
                    .unwrap();
                check(&t, &format!("random2/seed={seed}"));
            }
        }
    }

    #[test]
    fn outputs_remain_physical_for_random_tables() {
        use rand::{Rng, SeedableRng};
        let plan = settings_plan(2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let opts = MleOptions {
            max_iterations: 40,
            ..MleOptions::default()
        };
        for _ in 0..1000 {
            let counts: Vec<f64> = (0..plan.num_projectors())
                .map(|_| f64::from(rng.gen_range(0u32..50)))
                .collect();
            if counts.iter().sum::<f64>() == 0.0 {
                continue;
            }
            let table =
                CountTable::from_parts(plan.clone(), 50, CountMode::Poisson, 0, counts).unwrap();
            let result = mle_reconstruct_with(&table, &opts).unwrap();
            result.rho.validate().unwrap();
        }
    }

    /// The rotation-tree evaluation must agree with the direct projector
    /// arithmetic of `SettingsPlan::born_probabilities`: the first recorded
    /// log-likelihood is the one of the maximally mixed initial iterate.
    #[test]
    fn tree_log_likelihood_matches_direct_projector_arithmetic() {
        let plan = settings_plan(4).unwrap();
        let rho = DensityMatrix::blend(
            &DensityMatrix::from_pure(&build_phi_c()),
            0.62,
            &DensityMatrix::maximally_mixed(4).unwrap(),
            0.38,
        );
        let table = simulate_counts(&rho, &plan, 200, 8, CountMode::Multinomial).unwrap();
        let opts = MleOptions {
            max_iterations: 0,
            ..MleOptions::default()
        };
        let (result, trace) = run_mle(&table, &opts).unwrap();
        let mixed = DensityMatrix::maximally_mixed(4).unwrap();
        let mut expected = 0.0;
        for s in 0..plan.num_settings() {
            let probs = plan.born_probabilities(&mixed, s).unwrap();
            for (o, p) in probs.iter().enumerate() {
                let n_k = table.count(s, o);
                if n_k > 0.0 {
                    expected += n_k * p.max(1e-12).ln();
                }
            }
        }
        assert!(
            (trace[0] - expected).abs() < 1e-8,
            "tree {} vs direct {}",
            trace[0],
            expected
        );
        assert_eq!(result.iterations, 0);
    }

    /// One diluted update computed by the tree equals the textbook update
    /// assembled from explicit projectors.
    #[test]
    fn tree_update_matches_explicit_rr_update() {
        let plan = settings_plan(2).unwrap();
        let truth = DensityMatrix::blend(
            &DensityMatrix::from_pure(
                &crate::qcore::PureState::plus()
                    .tensor(&crate::qcore::PureState::y_minus())
                    .unwrap(),
            ),
            0.8,
            &DensityMatrix::maximally_mixed(2).unwrap(),
            0.2,
        );
        let table = simulate_counts(&truth, &plan, 300, 2, CountMode::Multinomial).unwrap();
        let opts = MleOptions {
            max_iterations: 1,
            ..MleOptions::default()
        };
        let epsilon = opts.epsilon;
        let (result, _) = run_mle(&table, &opts).unwrap();

        // Explicit reference: R from projector kets on ρ₀ = I/4.
        let dim = 4;
        let total = table.total();
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        let mut r_op = vec![Complex64::new(0.0, 0.0); dim * dim];
        for s in 0..plan.num_settings() {
            let probs = plan.born_probabilities(&mixed, s).unwrap();
            for (o, p) in probs.iter().enumerate() {
                let n_k = table.count(s, o);
                if n_k <= 0.0 {
                    continue;
                }
                let w = (n_k / total) / p.max(1e-12);
                let v = plan.projector_ket(s, o);
                for r in 0..dim {
                    for c in 0..dim {
                        r_op[r * dim + c] += v[r] * v[c].conj() * w;
                    }
                }
            }
        }
        let mut t = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                t[r * dim + c] = r_op[r * dim + c] * epsilon;
                if r == c {
                    t[r * dim + c] += 1.0;
                }
            }
        }
        // next = T ρ₀ T / tr = T² / (4 tr) since ρ₀ = I/4.
        let mut sq = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                sq[r * dim + c] = (0..dim).map(|k| t[r * dim + k] * t[k * dim + c]).sum();
            }
        }
        let trace: f64 = (0..dim).map(|r| sq[r * dim + r].re).sum();
        for (i, z) in sq.iter().enumerate() {
            let got = result.rho.elements()[i];
            let want = z / trace;
            assert!((got - want).norm() < 1e-12, "element {i}: {got} vs {want}");
        }
    }

    #[test]
    fn all_zero_counts_rejected() {
        let plan = settings_plan(2).unwrap();
        let table = CountTable::from_parts(
            plan.clone(),
            10,
            CountMode::Poisson,
            0,
            vec![0.0; plan.num_projectors()],
        )
        .unwrap();
        assert!(matches!(mle_reconstruct(&table), Err(Error::Estimation(_))));
    }

    #[test]
    fn estimates_tighten_with_more_shots() {
        // Median trace distance over 20 seeds decreases along
        // N ∈ {100, 1000, 10000}.
        let plan = settings_plan(2).unwrap();
        let truth = DensityMatrix::blend(
            &DensityMatrix::from_pure(
                &crate::qcore::PureState::plus()
                    .tensor(&crate::qcore::PureState::minus())
                    .unwrap(),
            ),
            0.8,
            &DensityMatrix::maximally_mixed(2).unwrap(),
            0.2,
        );
        let mut medians = Vec::new();
        for shots in [100u64, 1000, 10_000] {
            let mut dists: Vec<f64> = (0..20)
                .map(|seed| {
                    let table = simulate_counts(&truth, &plan, shots, seed, CountMode::Multinomial)
                        .unwrap();
                    let res = mle_reconstruct(&table).unwrap();
                    trace_distance(&res.rho, &truth).unwrap()
                })
                .collect();
            dists.sort_by(f64::total_cmp);
            medians.push((dists[9] + dists[10]) / 2.0);
        }
        assert!(
            medians[0] > medians[1] && medians[1] > medians[2],
            "medians not decreasing: {medians:?}"
        );
    }
}
