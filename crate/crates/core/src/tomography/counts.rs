//! Synthetic coincidence-count records.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;

use super::SettingsPlan;
use crate::error::{Error, Result};
use crate::qcore::DensityMatrix;

/// How the per-setting counts were drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMode {
    /// N outcomes per setting, multinomially distributed; counts of one
    /// setting sum to the shot number.
    Multinomial,
    /// Every projector count drawn independently as Poisson(N·p).
    Poisson,
}

impl CountMode {
    pub fn label(self) -> &'static str {
        match self {
            CountMode::Multinomial => "multinomial",
            CountMode::Poisson => "poisson",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        match s {
            "multinomial" => Ok(CountMode::Multinomial),
            "poisson" => Ok(CountMode::Poisson),
            other => Err(Error::Format(format!("unknown count mode '{other}'"))),
        }
    }
}

/// Counts for every (setting, outcome) pair of a plan.
///
/// Counts are stored as nonnegative reals: sampled tables hold integers,
/// while exact expectation tables may hold fractional values.
#[derive(Clone, Debug)]
pub struct CountTable {
    plan: SettingsPlan,
    shots: u64,
    mode: CountMode,
    seed: u64,
    counts: Vec<f64>,
}

impl CountTable {
    pub fn from_parts(
        plan: SettingsPlan,
        shots: u64,
        mode: CountMode,
        seed: u64,
        counts: Vec<f64>,
    ) -> Result<Self> {
        if counts.len() != plan.num_projectors() {
            return Err(Error::Dimension(format!(
                "expected {} counts, got {}",
                plan.num_projectors(),
                counts.len()
            )));
        }
        if counts.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::Config(
                "counts must be finite and nonnegative".into(),
            ));
        }
        if mode == CountMode::Multinomial {
            let outcomes = plan.outcomes_per_setting();
            for s in 0..plan.num_settings() {
                let sum: f64 = counts[s * outcomes..(s + 1) * outcomes].iter().sum();
                if (sum - shots as f64).abs() > 1e-6 * (shots as f64).max(1.0) {
                    return Err(Error::Config(format!(
                        "multinomial counts of setting {s} sum to {sum}, not {shots}"
                    )));
                }
            }
        }
        Ok(Self {
            plan,
            shots,
            mode,
            seed,
            counts,
        })
    }

    pub fn plan(&self) -> &SettingsPlan {
        &self.plan
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn mode(&self) -> CountMode {
        self.mode
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn count(&self, setting: usize, outcome: usize) -> f64 {
        self.counts[self.plan.projector_index(setting, outcome)]
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Empirical outcome frequencies of one setting, normalized by its total.
    pub fn frequencies(&self, setting: usize) -> Vec<f64> {
        let outcomes = self.plan.outcomes_per_setting();
        let row = &self.counts[setting * outcomes..(setting + 1) * outcomes];
        let total: f64 = row.iter().sum();
        if total <= 0.0 {
            return vec![0.0; outcomes];
        }
        row.iter().map(|c| c / total).collect()
    }
}

/// Draws a synthetic count table from the Born probabilities of `rho`.
///
/// Every setting consumes an independent random stream derived from
/// (`seed`, setting index), so the table is reproducible regardless of
/// scheduling.
pub fn simulate_counts(
    rho: &DensityMatrix,
    plan: &SettingsPlan,
    shots: u64,
    seed: u64,
    mode: CountMode,
) -> Result<CountTable> {
    if shots == 0 {
        return Err(Error::OutOfRange("shots must be ≥ 1".into()));
    }
    rho.validate()
        .map_err(|e| Error::Config(format!("invalid density matrix: {e}")))?;
    let outcomes = plan.outcomes_per_setting();
    let rows: Vec<Vec<f64>> = (0..plan.num_settings())
        .into_par_iter()
        .map(|s| -> Result<Vec<f64>> {
            let probs = plan.born_probabilities(rho, s)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let mut row = vec![0.0f64; outcomes];
            match mode {
                CountMode::Multinomial => {
                    // Chained conditional binomials; the last outcome takes
                    // the remainder so each row sums to `shots` exactly.
                    let mut remaining = shots;
                    let mut prob_left = 1.0f64;
                    for (o, &p) in probs.iter().enumerate() {
                        if o + 1 == outcomes {
                            row[o] = remaining as f64;
                            break;
                        }
                        if remaining == 0 {
                            break;
                        }
                        let cond = if prob_left > 0.0 {
                            (p / prob_left).clamp(0.0, 1.0)
                        } else {
                            0.0
                        };
                        let draw = Binomial::new(remaining, cond)
                            .map_err(|e| Error::Estimation(format!("binomial draw: {e}")))?
                            .sample(&mut rng);
                        row[o] = draw as f64;
                        remaining -= draw;
                        prob_left = (prob_left - p).max(0.0);
                    }
                }
                CountMode::Poisson => {
                    for (o, &p) in probs.iter().enumerate() {
                        let mean = shots as f64 * p;
                        if mean > 0.0 {
                            let draw: f64 = Poisson::new(mean)
                                .map_err(|e| Error::Estimation(format!("poisson draw: {e}")))?
                                .sample(&mut rng);
                            row[o] = draw;
                        }
                    }
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let counts = rows.into_iter().flatten().collect();
    CountTable::from_parts(plan.clone(), shots, mode, seed, counts)
}

/// The exact expected counts N·p_k — the infinite-statistics limit of the
/// multinomial mode, with fractional entries.
pub fn expected_counts(rho: &DensityMatrix, plan: &SettingsPlan, shots: u64) -> Result<CountTable> {
    if shots == 0 {
        return Err(Error::OutOfRange("shots must be ≥ 1".into()));
    }
    rho.validate()
        .map_err(|e| Error::Config(format!("invalid density matrix: {e}")))?;
    let mut counts = Vec::with_capacity(plan.num_projectors());
    for s in 0..plan.num_settings() {
        let probs = plan.born_probabilities(rho, s)?;
        counts.extend(probs.into_iter().map(|p| shots as f64 * p));
    }
    CountTable::from_parts(plan.clone(), shots, CountMode::Multinomial, 0, counts)
}
