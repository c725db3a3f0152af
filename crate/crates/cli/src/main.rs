//! `permreg`: command-line front end for the permuted-regression toolkit.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use permreg::bounds::{
    prop1_side_info, run_all_verifiers, thm1_sufficient, thm2_converse, thm3_approx_converse, BoundKind,
    BoundReport, VerifierSettings,
};
use permreg::experiment::{emit_csv, csv_string, ExperimentConfig, ExperimentRunner};
use permreg::hardness::{feasibility_check, partition_brute_force, reduce_partition, PartitionInstance};
use permreg::model::{generate_instance, signal_norm_for_gamma, TruePermutation};
use permreg::rng::rng_from_seed;
use permreg::{Error, EstimationInput, EstimatorRegistry, ProblemInstance};

const EXIT_OTHER: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

#[derive(Parser)]
#[command(name = "permreg", version, about = "Permutation recovery in noisy linear regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep exact-recovery frequency over an (n, Γ) grid and write CSV.
    Simulate(ExperimentArgs),
    /// Like `simulate`, but also report the distortion-error frequency {d_H >= D}.
    Distortion {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long = "D")]
        distortion: Option<usize>,
    },
    /// Write a random problem instance as JSON.
    Generate(GenerateArgs),
    /// Run one estimator on an instance JSON file.
    Estimate {
        /// Instance JSON (as written by `generate`).
        instance: PathBuf,
        #[arg(long, default_value = "sort1d")]
        method: String,
        /// Seed for randomized estimators.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate one of the recovery bounds.
    Bounds(BoundsArgs),
    /// Build the regression instance for a PARTITION input and decide it.
    ReducePartition {
        /// Comma-separated positive integers.
        #[arg(long, value_delimiter = ',', required = true)]
        b: Vec<u64>,
        #[arg(long, default_value_t = permreg::hardness::DEFAULT_MAX_D)]
        max_d: usize,
    },
    /// Monte Carlo and dense checks of the supporting lemmas.
    VerifyLemmas {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override every Monte Carlo sample count.
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "n", value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    gamma_grid: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    estimator: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Radius of the Hamming ball Π* is drawn from.
    #[arg(long)]
    hbar: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

impl ExperimentArgs {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_json(&read_input(path)?)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = &self.n_grid {
            cfg.n_grid = v.clone();
        }
        if let Some(v) = self.d {
            cfg.d = v;
        }
        if let Some(v) = &self.gamma_grid {
            cfg.gamma_grid = v.clone();
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.sigma {
            cfg.sigma = v;
        }
        if let Some(v) = &self.estimator {
            cfg.estimator = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.master_seed = v;
        }
        if self.hbar.is_some() {
            cfg.side_info_hbar = self.hbar;
        }
        if self.out.is_some() {
            cfg.output_path = self.out.clone();
        }
        Ok(cfg)
    }

    fn runner(&self) -> Result<ExperimentRunner, Error> {
        if self.workers == Some(0) {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        Ok(ExperimentRunner::default().with_workers(self.workers))
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Signal as comma-separated coordinates.
    #[arg(long, value_delimiter = ',', conflicts_with = "gamma")]
    x_star: Option<Vec<f64>>,
    /// Set x* = ||x*|| e_1 with the norm that gives this Γ.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    result: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long)]
    snr: f64,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "D")]
    distortion: Option<usize>,
    /// Constant in the sufficient condition; the theory leaves it unspecified.
    #[arg(long, default_value_t = 1.0)]
    c1: f64,
}

enum Failure {
    Lib(Error),
    Verification(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn read_input(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty<T: serde::Serialize>(value: &T) -> Result<String, Error> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn simulate(args: &ExperimentArgs) -> Result<(), Failure> {
    let cfg = args.config()?;
    let batch = args.runner()?.run_phase_transition(&cfg)?;
    match &cfg.output_path {
        Some(p) => emit_csv(&batch, p)?,
        None => print!("{}", csv_string(&batch)),
    }
    for a in &batch.aggregates {
        eprintln!(
            "n={} Γ={} recovered {}/{} (freq {:.3} ± {:.3})",
            a.n, a.gamma, a.successes, a.trials, a.freq, a.stderr
        );
    }
    Ok(())
}

fn distortion(args: &ExperimentArgs, dist: Option<usize>) -> Result<(), Failure> {
    let mut cfg = args.config()?;
    if dist.is_some() {
        cfg.distortion_d = dist;
    }
    let report = args.runner()?.run_distortion_experiment(&cfg)?;
    if let Some(p) = &cfg.output_path {
        emit_csv(&report.batch, p)?;
    }
    print!("{}", pretty(&report.points)?);
    for p in &report.points {
        eprintln!(
            "n={} Γ={} D={}: error freq {:.3}; {}",
            p.n,
            p.gamma,
            p.distortion,
            p.error_freq,
            p.converse.verdict()
        );
    }
    Ok(())
}

fn generate(args: &GenerateArgs) -> Result<(), Failure> {
    let x_star = match (&args.x_star, args.gamma) {
        (Some(x), _) => x.clone(),
        (None, Some(g)) => {
            let mut x = vec![0.0; args.d];
            if let Some(first) = x.first_mut() {
                *first = signal_norm_for_gamma(args.n, g, args.sigma);
            }
            x
        }
        (None, None) => return Err(Error::Config("pass --x-star or --gamma".into()).into()),
    };
    let inst = generate_instance(args.n, args.d, &x_star, args.sigma, TruePermutation::Random, args.seed)?;
    write_output(args.out.as_deref(), &(inst.to_json()? + "\n"))?;
    Ok(())
}

fn estimate(instance: &Path, method: &str, seed: u64) -> Result<(), Failure> {
    let inst = ProblemInstance::from_json(&read_input(instance)?)?;
    let registry = EstimatorRegistry::with_builtins();
    let estimator = registry.get(method)?;
    estimator.check_dimensions(inst.n, inst.d)?;
    let result = estimator
        .estimate(&EstimationInput::from_instance(&inst), &mut rng_from_seed(seed))?
        .with_truth(&inst.pi_star)?;
    print!("{}", pretty(&result)?);
    Ok(())
}

fn need<T>(value: Option<T>, flag: &str, result: &str) -> Result<T, Error> {
    value.ok_or_else(|| Error::Config(format!("--result {result} needs --{flag}")))
}

fn bounds(args: &BoundsArgs) -> Result<(), Failure> {
    let kind: BoundKind = args.result.parse()?;
    let report: BoundReport = match kind {
        BoundKind::Thm1 => thm1_sufficient(
            args.n,
            args.d,
            args.snr,
            need(args.epsilon, "epsilon", "thm1")?,
            args.c1,
        )?,
        BoundKind::Thm2 => thm2_converse(args.n, args.snr, need(args.delta, "delta", "thm2")?)?,
        BoundKind::Prop1 => prop1_side_info(args.n, args.snr)?,
        BoundKind::Thm3 => thm3_approx_converse(args.n, args.snr, need(args.distortion, "D", "thm3")?)?,
    };
    print!("{}", pretty(&report)?);
    println!("{}", report.verdict());
    Ok(())
}

fn reduce(b: &[u64], max_d: usize) -> Result<(), Failure> {
    let inst = PartitionInstance::new(b.to_vec())?;
    let reduction = reduce_partition(&inst);
    let feasibility = feasibility_check(&reduction, max_d)?;
    let partition = partition_brute_force(&inst)?;
    let out = json!({
        "reduction": reduction,
        "feasible": feasibility.feasible,
        "witness": feasibility.witness,
        "permutations_checked": feasibility.permutations_checked,
        "partition": partition,
    });
    print!("{}", pretty(&out)?);
    Ok(())
}

fn verify(seed: u64, samples: Option<usize>) -> Result<(), Failure> {
    let mut settings = VerifierSettings {
        seed,
        ..Default::default()
    };
    if let Some(s) = samples {
        settings.chi2_samples = s;
        settings.projection_samples = s;
        settings.hprob_samples = s;
    }
    let summary = run_all_verifiers(&settings)?;
    print!("{}", pretty(&summary)?);
    let failures = summary.failures();
    if failures.is_empty() {
        eprintln!("all lemma checks passed");
        Ok(())
    } else {
        Err(Failure::Verification(failures))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate(args) => simulate(&args),
        Command::Distortion { exp, distortion: d } => distortion(&exp, d),
        Command::Generate(args) => generate(&args),
        Command::Estimate { instance, method, seed } => estimate(&instance, &method, seed),
        Command::Bounds(args) => bounds(&args),
        Command::ReducePartition { b, max_d } => reduce(&b, max_d),
        Command::VerifyLemmas { seed, samples } => verify(seed, samples),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(failures)) => {
            for f in failures {
                eprintln!("FAILED: {f}");
            }
            ExitCode::from(EXIT_VERIFICATION)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { EXIT_CONFIG } else { EXIT_OTHER })
        }
    }
}
