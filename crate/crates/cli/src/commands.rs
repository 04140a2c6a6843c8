//! Argument types and implementations of the three subcommands.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use oneway_core::cluster::{apply_noise, NoiseSpec, ResourceKind};
use oneway_core::mbqc::{
    classify, constant_probability, enumerate_branches, execute, expected_output, program_for,
    success_probability, BlackBox, FunctionClass, MeasurementProgram, ResourceState,
};
use oneway_core::qcore::{fidelity, negativity, DensityMatrix, PureState};
use oneway_core::tomography::{
    mle_reconstruct, monte_carlo_errorbar, settings_plan, simulate_counts, witness_against,
    write_counts_csv, write_density_json, CountMode, MleResult,
};
use oneway_core::{Error, Result};

/// Salt separating the Monte-Carlo random streams from the count-sampling
/// streams derived from the same user seed.
const MC_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Copy, ValueEnum)]
pub enum BlackBoxArg {
    /// BB(i) = 1⊗1
    Bb1,
    /// BB(ii) = 1⊗X
    Bb2,
    /// BB(iii) = CNOT
    Bb3,
    /// BB(iv) = (1⊗X)·CNOT
    Bb4,
}

impl BlackBoxArg {
    fn to_black_box(self) -> BlackBox {
        match self {
            BlackBoxArg::Bb1 => BlackBox::IdId,
            BlackBoxArg::Bb2 => BlackBox::IdX,
            BlackBoxArg::Bb3 => BlackBox::Cnot,
            BlackBoxArg::Bb4 => BlackBox::XCnot,
        }
    }

    fn name(self) -> &'static str {
        match self {
            BlackBoxArg::Bb1 => "bb1",
            BlackBoxArg::Bb2 => "bb2",
            BlackBoxArg::Bb3 => "bb3",
            BlackBoxArg::Bb4 => "bb4",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ResourceArg {
    /// The four-photon state (|0000⟩+|0011⟩+|1100⟩−|1111⟩)/2
    PhiC,
    /// The locally equivalent linear cluster
    PhiLin,
}

impl ResourceArg {
    fn to_kind(self) -> ResourceKind {
        match self {
            ResourceArg::PhiC => ResourceKind::PhiC,
            ResourceArg::PhiLin => ResourceKind::PhiLin,
        }
    }
}

/// `none`, `white:p`, or `dephase:q1,q2,q3,q4`.
#[derive(Clone, Debug)]
pub struct NoiseArg(pub NoiseSpec);

impl std::str::FromStr for NoiseArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "none" {
            return Ok(NoiseArg(NoiseSpec::None));
        }
        if let Some(p) = s.strip_prefix("white:") {
            let p: f64 = p
                .parse()
                .map_err(|e| format!("bad white-noise weight: {e}"))?;
            return Ok(NoiseArg(NoiseSpec::WhiteNoise(p)));
        }
        if let Some(qs) = s.strip_prefix("dephase:") {
            let qs: std::result::Result<Vec<f64>, _> = qs.split(',').map(str::parse).collect();
            let qs = qs.map_err(|e| format!("bad dephasing strengths: {e}"))?;
            if qs.len() != 4 {
                return Err(format!(
                    "dephase takes 4 comma-separated values, got {}",
                    qs.len()
                ));
            }
            return Ok(NoiseArg(NoiseSpec::Dephasing(qs)));
        }
        Err("expected none, white:p, or dephase:q1,q2,q3,q4".into())
    }
}

impl std::fmt::Display for NoiseArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.0 {
            NoiseSpec::None => write!(f, "none"),
            NoiseSpec::WhiteNoise(p) => write!(f, "white:{p}"),
            NoiseSpec::Dephasing(qs) => {
                write!(f, "dephase:")?;
                for (i, q) in qs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{q}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Args)]
pub struct RunArgs {
    /// Oracle configuration.
    #[arg(long, value_enum)]
    pub blackbox: BlackBoxArg,
    /// Entangled resource the program runs on.
    #[arg(long, value_enum, default_value_t = ResourceArg::PhiC)]
    pub resource: ResourceArg,
    /// Noise applied to the resource.
    #[arg(long, default_value = "none")]
    pub noise: NoiseArg,
    /// Apply feed-forward corrections (default).
    #[arg(long, overrides_with = "no_ff")]
    pub ff: bool,
    /// Skip the outcome-conditioned corrections; the fixed local rotations
    /// still apply.
    #[arg(long, overrides_with = "ff")]
    pub no_ff: bool,
    /// Number of sampled runs.
    #[arg(long, default_value_t = 1)]
    pub reps: u64,
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum TomographyTarget {
    /// The 4-qubit entangled resource itself.
    Resource,
    /// The 2-qubit output register after a program run.
    Output,
}

#[derive(Args)]
pub struct TomographyArgs {
    /// What to tomograph.
    #[arg(value_enum)]
    pub target: TomographyTarget,
    /// Oracle configuration (used in output mode).
    #[arg(long, value_enum, default_value_t = BlackBoxArg::Bb1)]
    pub blackbox: BlackBoxArg,
    #[arg(long, value_enum, default_value_t = ResourceArg::PhiC)]
    pub resource: ResourceArg,
    #[arg(long, default_value = "none")]
    pub noise: NoiseArg,
    #[arg(long, overrides_with = "no_ff")]
    pub ff: bool,
    #[arg(long, overrides_with = "ff")]
    pub no_ff: bool,
    /// Shots per measurement setting.
    #[arg(long, default_value_t = 500)]
    pub shots: u64,
    /// Monte-Carlo repetitions for the error bar.
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output prefix; writes PREFIX.counts.csv and PREFIX.rho.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub blackbox: BlackBoxArg,
    #[arg(long, value_enum, default_value_t = ResourceArg::PhiC)]
    pub resource: ResourceArg,
    /// Comma-separated white-noise weights in [0, 1].
    #[arg(long, value_delimiter = ',', required = true)]
    pub grid: Vec<f64>,
    /// Accepted for interface symmetry; the sweep itself is exact.
    #[arg(long, default_value_t = 500)]
    pub shots: u64,
    /// Accepted for interface symmetry; the sweep itself is exact.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Destination CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

// --ff is the default; the flag pair exists so scripts can be explicit
// either way (clap resolves conflicts via overrides_with).
fn feed_forward(_ff_flag: bool, no_ff: bool) -> bool {
    !no_ff
}

fn prepare_resource(kind: ResourceKind, noise: &NoiseSpec) -> Result<ResourceState> {
    let ideal = kind.ideal_state();
    Ok(match noise {
        NoiseSpec::None => ResourceState::Pure(ideal),
        spec => ResourceState::Mixed(apply_noise(&ideal, spec)?),
    })
}

#[derive(Serialize)]
struct BranchReport {
    outcomes: Vec<(usize, u8)>,
    probability: f64,
    p_constant: f64,
    output_fidelity: f64,
}

#[derive(Serialize)]
struct RunReport {
    blackbox: String,
    resource: String,
    noise: String,
    feedforward: bool,
    seed: u64,
    repetitions: u64,
    exact_success_probability: f64,
    classified_constant: u64,
    classified_balanced: u64,
    empirical_success_rate: f64,
    branches: Vec<BranchReport>,
}

pub fn run(args: &RunArgs) -> Result<()> {
    if args.reps < 1 {
        return Err(Error::OutOfRange("--reps must be ≥ 1".into()));
    }
    let bb = args.blackbox.to_black_box();
    let kind = args.resource.to_kind();
    let ff = feed_forward(args.ff, args.no_ff);
    let program = program_for(bb, kind);
    let resource = prepare_resource(kind, &args.noise.0)?;

    let exact = success_probability(&program, &resource, ff)?;
    let branches = enumerate_branches(&program, &resource, ff)?;
    let ideal_output = bb.ideal_output();

    // Each repetition draws from its own random stream, so run r is the
    // same regardless of how many repetitions precede it.
    let mut constant_count = 0u64;
    let mut per_run = Vec::new();
    for rep in 0..args.reps {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        rng.set_stream(rep);
        let record = execute(&program, &resource, &mut rng, ff)?;
        let class = classify(&record, &mut rng)?;
        if class == FunctionClass::Constant {
            constant_count += 1;
        }
        if args.reps <= 16 {
            per_run.push((record.outcomes.clone(), class));
        }
    }
    let balanced_count = args.reps - constant_count;
    let correct = if bb.is_constant() {
        constant_count
    } else {
        balanced_count
    };
    let empirical = correct as f64 / args.reps as f64;

    println!(
        "black box {} on {kind}, noise {}, feed-forward {}, seed {}",
        bb,
        args.noise,
        if ff { "on" } else { "off" },
        args.seed
    );
    println!("exact success probability: {exact:.12}");
    println!("branch table (outcome bits, probability, P(constant), output fidelity):");
    let mut branch_reports = Vec::new();
    for branch in &branches {
        let p_constant = constant_probability(&branch.record)?;
        let f = fidelity(&branch.record.output_state, &ideal_output)?;
        let bits: Vec<String> = branch
            .record
            .outcomes
            .iter()
            .map(|(q, s)| format!("s{q}={s}"))
            .collect();
        println!(
            "  {}  p={:.6}  P(constant)={:.6}  F={:.6}",
            bits.join(" "),
            branch.probability,
            p_constant,
            f
        );
        branch_reports.push(BranchReport {
            outcomes: branch.record.outcomes.clone(),
            probability: branch.probability,
            p_constant,
            output_fidelity: f,
        });
    }
    for (rep, (outcomes, class)) in per_run.iter().enumerate() {
        let bits: Vec<String> = outcomes.iter().map(|(q, s)| format!("s{q}={s}")).collect();
        println!("run {}: {}  → {class}", rep + 1, bits.join(" "));
    }
    println!(
        "runs: {}, classified constant: {constant_count}, balanced: {balanced_count}",
        args.reps
    );
    println!(
        "empirical success rate: {empirical:.4} (correct label: {})",
        if bb.is_constant() {
            "constant"
        } else {
            "balanced"
        }
    );

    if let Some(path) = &args.out {
        let report = RunReport {
            blackbox: args.blackbox.name().into(),
            resource: kind.to_string(),
            noise: args.noise.to_string(),
            feedforward: ff,
            seed: args.seed,
            repetitions: args.reps,
            exact_success_probability: exact,
            classified_constant: constant_count,
            classified_balanced: balanced_count,
            empirical_success_rate: empirical,
            branches: branch_reports,
        };
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| Error::Format(format!("report serialization: {e}")))?;
        std::fs::write(path, json + "\n")?;
        println!("wrote report: {}", path.display());
    }
    Ok(())
}

fn print_mle_summary(fit: &MleResult) {
    println!(
        "MLE: {} iterations, converged: {}, log-likelihood {:.6}",
        fit.iterations, fit.converged, fit.log_likelihood
    );
}

pub fn tomography(args: &TomographyArgs) -> Result<()> {
    let kind = args.resource.to_kind();
    let ff = feed_forward(args.ff, args.no_ff);
    let resource = prepare_resource(kind, &args.noise.0)?;
    let mc_seed = args.seed ^ MC_SEED_SALT;

    let counts_path = args.out.with_extension("counts.csv");
    let rho_path = args.out.with_extension("rho.json");

    match args.target {
        TomographyTarget::Resource => {
            let plan = settings_plan(4)?;
            let rho = resource.to_density();
            println!(
                "tomography of resource {kind}, noise {}, {} shots/setting, seed {}",
                args.noise, args.shots, args.seed
            );
            let table =
                simulate_counts(&rho, &plan, args.shots, args.seed, CountMode::Multinomial)?;
            let fit = mle_reconstruct(&table)?;
            print_mle_summary(&fit);
            let ideal = kind.ideal_state();
            let f = fidelity(&fit.rho, &ideal)?;
            println!("fidelity with ideal {kind}: {f:.6}");
            let bar = monte_carlo_errorbar(&table, &ideal, args.runs, mc_seed)?;
            println!(
                "Monte-Carlo error bar ({} runs): {:.6} ± {:.6}",
                bar.runs, bar.mean, bar.std
            );
            let (wf, passed) = witness_against(&fit.rho, &ideal)?;
            if passed {
                println!(
                    "biseparability witness: F = {wf:.6} > 0.5 — genuine four-partite \
                     entanglement witness passed"
                );
            } else {
                println!("biseparability witness: F = {wf:.6} ≤ 0.5 — not passed");
            }
            write_counts_csv(&table, &counts_path)?;
            write_density_json(&fit.rho, &rho_path)?;
        }
        TomographyTarget::Output => {
            let bb = args.blackbox.to_black_box();
            let program: MeasurementProgram = program_for(bb, kind);
            let plan = settings_plan(2)?;
            let out_state: DensityMatrix = expected_output(&program, &resource, ff)?;
            println!(
                "tomography of {} output on {kind}, noise {}, feed-forward {}, {} shots/setting, \
                 seed {}",
                bb,
                args.noise,
                if ff { "on" } else { "off" },
                args.shots,
                args.seed
            );
            let table = simulate_counts(
                &out_state,
                &plan,
                args.shots,
                args.seed,
                CountMode::Multinomial,
            )?;
            let fit = mle_reconstruct(&table)?;
            print_mle_summary(&fit);
            let ideal: PureState = bb.ideal_output();
            let f = fidelity(&fit.rho, &ideal)?;
            println!("fidelity with ideal output: {f:.6}");
            let bar = monte_carlo_errorbar(&table, &ideal, args.runs, mc_seed)?;
            println!(
                "Monte-Carlo error bar ({} runs): {:.6} ± {:.6}",
                bar.runs, bar.mean, bar.std
            );
            let neg = negativity(&fit.rho)?;
            println!("negativity of the reconstructed output: {neg:.6e}");
            write_counts_csv(&table, &counts_path)?;
            write_density_json(&fit.rho, &rho_path)?;
        }
    }
    println!("wrote counts CSV: {}", counts_path.display());
    println!("wrote density JSON: {}", rho_path.display());
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    if args.grid.is_empty() {
        return Err(Error::Config("empty --grid".into()));
    }
    if args.grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::OutOfRange("--grid values must lie in [0, 1]".into()));
    }
    let bb = args.blackbox.to_black_box();
    let kind = args.resource.to_kind();
    let program = program_for(bb, kind);
    let ideal_resource = kind.ideal_state();
    let ideal_output = bb.ideal_output();

    let mut csv = String::from("p,F_resource,success_bb,fidelity_out_ff,fidelity_out_noff\n");
    println!(
        "exact white-noise sweep for {} on {kind} over {} grid points",
        bb,
        args.grid.len()
    );
    for &p in &args.grid {
        let rho = apply_noise(&ideal_resource, &NoiseSpec::WhiteNoise(p))?;
        let f_resource = fidelity(&rho, &ideal_resource)?;
        let resource = ResourceState::Mixed(rho);
        let success = success_probability(&program, &resource, true)?;
        let out_ff = expected_output(&program, &resource, true)?;
        let out_noff = expected_output(&program, &resource, false)?;
        let f_ff = fidelity(&out_ff, &ideal_output)?;
        let f_noff = fidelity(&out_noff, &ideal_output)?;
        csv.push_str(&format!("{p},{f_resource},{success},{f_ff},{f_noff}\n"));
        println!(
            "  p={p}: F_resource={f_resource:.6} success={success:.6} F_out(ff)={f_ff:.6} \
             F_out(no-ff)={f_noff:.6}"
        );
    }
    std::fs::write(&args.out, csv)?;
    println!("wrote sweep CSV: {}", args.out.display());
    Ok(())
}
