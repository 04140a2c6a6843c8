//! Over-complete state tomography: measurement settings, synthetic count
//! statistics, maximum-likelihood reconstruction and error analysis.
//!
//! Every qubit is measured in each of the three mutually unbiased bases
//! {σ_x, σ_y, σ_z}, whose eigenstates are {|+⟩,|−⟩}, {|R⟩,|L⟩} and
//! {|0⟩,|1⟩}. The 3^n basis combinations × 2^n outcomes give the 6^n local
//! projectors of the over-complete scheme — 1296 for the four-qubit
//! resource, 36 for a two-qubit output register.

mod counts;
mod fileio;
mod mle;
mod montecarlo;

pub use counts::{expected_counts, simulate_counts, CountMode, CountTable};
pub use fileio::{read_counts_csv, read_density_json, write_counts_csv, write_density_json};
pub use mle::{mle_reconstruct, mle_reconstruct_with, MleOptions, MleResult};
pub use montecarlo::{monte_carlo_errorbar, ErrorBar};

use num_complex::Complex64;

use crate::cluster::build_phi_c;
use crate::error::{Error, Result};
use crate::qcore::{fidelity, DensityMatrix, PureState};

/// Fidelity bound no biseparable four-qubit state can exceed.
pub const BISEPARABILITY_BOUND: f64 = 0.5;

/// One of the three mutually unbiased single-qubit measurement axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// Eigenkets by outcome bit: 0 selects |+⟩ / |R⟩ / |0⟩.
    fn eigenkets(self) -> [[Complex64; 2]; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Axis::X => [
                [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
                [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
            ],
            Axis::Y => [
                [Complex64::new(h, 0.0), Complex64::new(0.0, h)],
                [Complex64::new(h, 0.0), Complex64::new(0.0, -h)],
            ],
            Axis::Z => [
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            ],
        }
    }

    pub fn letter(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Result<Self> {
        match c {
            'X' => Ok(Axis::X),
            'Y' => Ok(Axis::Y),
            'Z' => Ok(Axis::Z),
            other => Err(Error::Format(format!("unknown measurement axis '{other}'"))),
        }
    }
}

/// The full set of 3^n local basis settings and the 6^n product projectors
/// they induce.
#[derive(Clone, Debug)]
pub struct SettingsPlan {
    n: usize,
    settings: Vec<Vec<Axis>>,
    /// Projector kets, flattened as [setting][outcome][amplitude].
    projectors: Vec<Complex64>,
}

/// Builds the over-complete plan for an n-qubit register (n ∈ {2, 4}).
pub fn settings_plan(n: usize) -> Result<SettingsPlan> {
    if n != 2 && n != 4 {
        return Err(Error::Config(format!(
            "tomography supports 2- or 4-qubit registers, got {n}"
        )));
    }
    let num_settings = 3usize.pow(n as u32);
    let dim = 1usize << n;
    let mut settings = Vec::with_capacity(num_settings);
    for s in 0..num_settings {
        // Base-3 digits, qubit 1 as the most significant digit.
        let mut axes = vec![Axis::X; n];
        let mut rem = s;
        for q in (0..n).rev() {
            axes[q] = Axis::ALL[rem % 3];
            rem /= 3;
        }
        settings.push(axes);
    }
    let mut projectors = Vec::with_capacity(num_settings * dim * dim);
    for axes in &settings {
        for outcome in 0..dim {
            for index in 0..dim {
                let mut amp = Complex64::new(1.0, 0.0);
                for (q, axis) in axes.iter().enumerate() {
                    let o = (outcome >> (n - 1 - q)) & 1;
                    let b = (index >> (n - 1 - q)) & 1;
                    amp *= axis.eigenkets()[o][b];
                }
                projectors.push(amp);
            }
        }
    }
    Ok(SettingsPlan {
        n,
        settings,
        projectors,
    })
}

impl SettingsPlan {
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn num_settings(&self) -> usize {
        self.settings.len()
    }

    pub fn outcomes_per_setting(&self) -> usize {
        1 << self.n
    }

    pub fn num_projectors(&self) -> usize {
        self.num_settings() * self.outcomes_per_setting()
    }

    pub fn settings(&self) -> &[Vec<Axis>] {
        &self.settings
    }

    /// E.g. "XYZX" with qubit 1 first.
    pub fn setting_label(&self, setting: usize) -> String {
        self.settings[setting].iter().map(|a| a.letter()).collect()
    }

    /// E.g. "0010" with qubit 1 first.
    pub fn outcome_label(&self, outcome: usize) -> String {
        (0..self.n)
            .map(|q| {
                if (outcome >> (self.n - 1 - q)) & 1 == 1 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }

    /// Flat projector index of (setting, outcome).
    pub fn projector_index(&self, setting: usize, outcome: usize) -> usize {
        setting * self.outcomes_per_setting() + outcome
    }

    /// The product-state ket of one projector.
    pub fn projector_ket(&self, setting: usize, outcome: usize) -> &[Complex64] {
        let dim = self.dim();
        let start = self.projector_index(setting, outcome) * dim;
        &self.projectors[start..start + dim]
    }

    /// Born probabilities of all outcomes of one setting; they sum to one
    /// for any valid density matrix.
    pub fn born_probabilities(&self, rho: &DensityMatrix, setting: usize) -> Result<Vec<f64>> {
        if rho.num_qubits() != self.n {
            return Err(Error::Dimension(format!(
                "plan is for {} qubits, state has {}",
                self.n,
                rho.num_qubits()
            )));
        }
        let dim = self.dim();
        Ok((0..self.outcomes_per_setting())
            .map(|o| {
                let v = self.projector_ket(setting, o);
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..dim {
                    let row: Complex64 =
                        v.iter().enumerate().map(|(c, vc)| rho.get(r, c) * vc).sum();
                    acc += v[r].conj() * row;
                }
                acc.re.max(0.0)
            })
            .collect())
    }
}

/// Evaluates the genuine-multipartite-entanglement witness: the fidelity of
/// a four-qubit state with the ideal cluster resource, passed when it
/// exceeds the biseparability bound 0.5 (strictly; equality at the bound
/// fails, with a 1e-12 guard against rounding).
pub fn biseparability_witness(rho: &DensityMatrix) -> Result<(f64, bool)> {
    if rho.num_qubits() != 4 {
        return Err(Error::Dimension(format!(
            "witness requires a 4-qubit state, got {}",
            rho.num_qubits()
        )));
    }
    let f = fidelity(rho, &build_phi_c())?;
    Ok((f, f > BISEPARABILITY_BOUND + 1e-12))
}

/// Witness helper against an arbitrary pure target with the same 0.5 bound;
/// used for resources that are local-unitary images of the cluster.
pub fn witness_against(rho: &DensityMatrix, target: &PureState) -> Result<(f64, bool)> {
    let f = fidelity(rho, target)?;
    Ok((f, f > BISEPARABILITY_BOUND + 1e-12))
}
