//! Poissonian Monte-Carlo error bars for reconstructed fidelities.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use super::counts::{CountMode, CountTable};
use super::mle::mle_reconstruct;
use crate::error::{Error, Result};
use crate::qcore::{fidelity, PureState};

/// Mean and dispersion of a fidelity estimate over Monte-Carlo repetitions.
#[derive(Clone, Copy, Debug)]
pub struct ErrorBar {
    pub mean: f64,
    pub std: f64,
    pub runs: usize,
}

/// Repeats the entire tomography analysis `runs` times, each time
/// resampling every count as Poisson with mean equal to the observed count,
/// reconstructing by maximum likelihood and evaluating the fidelity with
/// `target`. Returns the sample mean and standard deviation.
///
/// Run r draws from the random stream (`seed`, r), so results are
/// deterministic and independent of parallel scheduling.
pub fn monte_carlo_errorbar(
    counts: &CountTable,
    target: &PureState,
    runs: usize,
    seed: u64,
) -> Result<ErrorBar> {
    if runs < 2 {
        return Err(Error::OutOfRange(format!(
            "Monte-Carlo needs at least 2 runs, got {runs}"
        )));
    }
    if target.num_qubits() != counts.plan().num_qubits() {
        return Err(Error::Dimension(format!(
            "target has {} qubits, plan {}",
            target.num_qubits(),
            counts.plan().num_qubits()
        )));
    }
    let fidelities: Vec<f64> = (0..runs)
        .into_par_iter()
        .map(|run| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(run as u64);
            let resampled: Vec<f64> = counts
                .counts()
                .iter()
                .map(|&c| -> Result<f64> {
                    if c > 0.0 {
                        let draw: f64 = Poisson::new(c)
                            .map_err(|e| Error::Estimation(format!("poisson resample: {e}")))?
                            .sample(&mut rng);
                        Ok(draw)
                    } else {
                        Ok(0.0)
                    }
                })
                .collect::<Result<_>>()?;
            let table = CountTable::from_parts(
                counts.plan().clone(),
                counts.shots(),
                CountMode::Poisson,
                seed,
                resampled,
            )?;
            let result = mle_reconstruct(&table)?;
            fidelity(&result.rho, target)
        })
        .collect::<Result<_>>()?;
    let mean = fidelities.iter().sum::<f64>() / runs as f64;
    let var = fidelities.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
    Ok(ErrorBar {
        mean,
        std: var.sqrt(),
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::DensityMatrix;
    use crate::tomography::{expected_counts, settings_plan, simulate_counts};

    fn output_like_state() -> (PureState, DensityMatrix) {
        let target = PureState::plus().tensor(&PureState::minus()).unwrap();
        let rho = DensityMatrix::blend(
            &DensityMatrix::from_pure(&target),
            0.6,
            &DensityMatrix::maximally_mixed(2).unwrap(),
            0.4,
        );
        (target, rho)
    }

    #[test]
    fn dispersion_is_positive_and_moderate() {
        let plan = settings_plan(2).unwrap();
        let (target, rho) = output_like_state();
        let table = simulate_counts(&rho, &plan, 500, 3, CountMode::Multinomial).unwrap();
        let bar = monte_carlo_errorbar(&table, &target, 40, 8).unwrap();
        assert!(bar.std > 0.0 && bar.std < 0.05, "std {}", bar.std);
        assert!((bar.mean - 0.7).abs() < 0.1, "mean {}", bar.mean);
    }

    #[test]
    fn zero_noise_limit_has_vanishing_dispersion() {
        // Exact expected counts scaled up by 1e8: relative Poisson
        // fluctuations vanish and the spread collapses.
        let plan = settings_plan(2).unwrap();
        let (target, rho) = output_like_state();
        let table = expected_counts(&rho, &plan, 500 * 100_000_000).unwrap();
        let bar = monte_carlo_errorbar(&table, &target, 10, 4).unwrap();
        assert!(bar.std < 1e-3, "std {}", bar.std);
    }

    #[test]
    fn too_few_runs_rejected() {
        let plan = settings_plan(2).unwrap();
        let (target, rho) = output_like_state();
        let table = simulate_counts(&rho, &plan, 100, 1, CountMode::Multinomial).unwrap();
        assert!(monte_carlo_errorbar(&table, &target, 1, 0).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let plan = settings_plan(2).unwrap();
        let (target, rho) = output_like_state();
        let table = simulate_counts(&rho, &plan, 200, 6, CountMode::Multinomial).unwrap();
        let a = monte_carlo_errorbar(&table, &target, 12, 5).unwrap();
        let b = monte_carlo_errorbar(&table, &target, 12, 5).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.std, b.std);
    }
}
