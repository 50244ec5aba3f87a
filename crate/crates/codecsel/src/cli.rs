//! Command-line interface.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use codecsel_core::bounds::{
    epsilon_asymptotic_emd, epsilon_finite_emd, epsilon_gaussian_chernoff, epsilon_hoeffding,
    hoeffding_dominates, hoeffding_dominates_rederived, DominanceCase, Tails,
};
use codecsel_core::gs::global_sampling;
use codecsel_core::psp::psp;
use codecsel_core::{BoundMethod, SelectionReport};
use serde_json::json;

use crate::config::{AlgorithmChoice, Overrides, RunConfig};
use crate::error::{exit, CliError};
use crate::io::{save_matrix, write_matrix};
use crate::output::{coverage_json, report_json, to_pretty, write_outputs};
use crate::synth::{coverage_trial, TrialConfig};

#[derive(Debug, Parser)]
#[command(name = "codecsel", version, about = "Certified codec selection from sampled criterion values")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Select with global sampling over the whole sample.
    SelectGs(RunArgs),
    /// Select with progressive sampling and pruning.
    SelectPsp(RunArgs),
    /// Sample a matrix from a synthetic world.
    SynthGen(RunArgs),
    /// Estimate guarantee failure rates on a synthetic world.
    Coverage(RunArgs),
    /// Print the four half-widths and the dominance predicates.
    CompareBounds(CompareArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Long-form matrix file.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// World spec file.
    #[arg(long)]
    world: Option<PathBuf>,
    /// Samples to draw from the world.
    #[arg(long)]
    samples: Option<usize>,
    /// Apply a seeded shuffle to the sample order.
    #[arg(long)]
    shuffle: bool,
    /// Seed for sampling and shuffling.
    #[arg(long)]
    seed: Option<u64>,
    /// finite-emd, asymptotic-emd, hoeffding or gaussian-chernoff.
    #[arg(long)]
    method: Option<String>,
    /// Failure probability.
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// PSP optimality tolerance.
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    /// PSP initial batch size.
    #[arg(long)]
    s0: Option<usize>,
    /// Objective weights, `criterion:weight[,criterion:weight…]`.
    #[arg(long)]
    objective: Option<String>,
    /// Constraint `a1*c1+a2*c2<=b`; repeatable.
    #[arg(long = "constraint", allow_hyphen_values = true)]
    constraints: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Coverage trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Coverage procedure: gs or psp.
    #[arg(long)]
    algorithm: Option<String>,
}

impl From<RunArgs> for Overrides {
    fn from(a: RunArgs) -> Self {
        Overrides {
            config: a.config,
            matrix: a.matrix,
            world: a.world,
            samples: a.samples,
            shuffle: a.shuffle,
            seed: a.seed,
            method: a.method,
            delta: a.delta,
            epsilon: a.epsilon,
            s0: a.s0,
            objective: a.objective,
            constraints: a.constraints,
            out: a.out,
            trials: a.trials,
            algorithm: a.algorithm,
        }
    }
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Sample count.
    #[arg(long)]
    m: usize,
    /// Family size |H|.
    #[arg(long)]
    codecs: usize,
    /// Criterion count |C|.
    #[arg(long)]
    criteria: usize,
    /// Failure probability.
    #[arg(long, allow_negative_numbers = true)]
    delta: f64,
    /// Largest per-codec standard deviation.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Empirical maximum discrepancy.
    #[arg(long, default_value_t = 0.0)]
    emd: f64,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::SelectGs(a) => {
            let rc = RunConfig::resolve(&a.into())?;
            let cfg = rc.gs_config()?;
            let matrix = rc.load_input()?;
            finish(global_sampling(&matrix, &cfg)?, &rc)
        }
        Command::SelectPsp(a) => {
            let rc = RunConfig::resolve(&a.into())?;
            let cfg = rc.psp_config()?;
            let matrix = rc.load_input()?;
            finish(psp(&matrix, &cfg)?, &rc)
        }
        Command::SynthGen(a) => {
            let rc = RunConfig::resolve(&a.into())?;
            rc.world()?;
            let matrix = rc.load_input()?;
            match &rc.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                    save_matrix(&matrix, &dir.join("matrix.csv"))?;
                }
                None => write_matrix(&matrix, std::io::stdout().lock())
                    .map_err(|e| CliError::io("<stdout>", e))?,
            }
            Ok(exit::CERTIFIED)
        }
        Command::Coverage(a) => coverage(RunConfig::resolve(&a.into())?),
        Command::CompareBounds(a) => compare_bounds(&a),
    }
}

fn finish(report: SelectionReport, rc: &RunConfig) -> Result<i32, CliError> {
    let certified = report.is_certified();
    eprintln!(
        "{}: reason {}, liberal {:?}, conservative {:?}, certified {}",
        report.algorithm.tag(),
        report.terminated_reason.tag(),
        report.liberal_set,
        report.conservative_set,
        certified
    );
    match &rc.out {
        Some(dir) => write_outputs(&report, dir)?,
        None => print(&to_pretty(&report_json(&report)))?,
    }
    Ok(if certified { exit::CERTIFIED } else { exit::NOT_CERTIFIED })
}

fn print(text: &str) -> Result<(), CliError> {
    std::io::stdout()
        .lock()
        .write_all(text.as_bytes())
        .map_err(|e| CliError::io("<stdout>", e))
}

fn coverage(rc: RunConfig) -> Result<i32, CliError> {
    let (world, m) = rc.world()?;
    let trials = rc
        .trials
        .ok_or_else(|| CliError::Config("`coverage.trials` is required (config key or `--trials`)".into()))?;
    if trials == 0 {
        return Err(CliError::Config("`coverage.trials` must be at least 1".into()));
    }
    let (cfg, algorithm) = match rc.algorithm {
        AlgorithmChoice::Gs => (TrialConfig::Gs(rc.gs_config()?), "gs"),
        AlgorithmChoice::Psp => (TrialConfig::Psp(rc.psp_config()?), "psp"),
    };
    let stats = coverage_trial(world, m, &cfg, trials, rc.seed)?;
    let params = json!({
        "algorithm": algorithm,
        "method": rc.method.map(BoundMethod::tag),
        "delta": rc.delta,
        "epsilon": if algorithm == "psp" { rc.epsilon } else { None },
        "s0": if algorithm == "psp" { Some(rc.s0) } else { None },
        "samples": m,
        "seed": rc.seed,
    });
    let text = to_pretty(&coverage_json(&stats, params));
    match &rc.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            let path = dir.join("coverage.json");
            std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        }
        None => print(&text)?,
    }
    eprintln!(
        "coverage: {} trials, {} rejected, failure fraction {}",
        stats.trials,
        stats.rejected,
        stats.failure_fraction()
    );
    Ok(exit::CERTIFIED)
}

fn compare_bounds(a: &CompareArgs) -> Result<i32, CliError> {
    let sigma_sq = 2.0 * a.sigma * a.sigma;
    let rows = [
        (
            BoundMethod::FiniteSampleEmd,
            epsilon_finite_emd(a.emd, a.m, a.criteria, a.delta)?,
        ),
        (
            BoundMethod::AsymptoticEmd,
            epsilon_asymptotic_emd(a.emd, sigma_sq, a.m, a.criteria, a.delta, Tails::Two)?,
        ),
        (
            BoundMethod::HoeffdingUnion,
            epsilon_hoeffding(a.m, a.codecs, a.criteria, a.delta)?,
        ),
        (
            BoundMethod::GaussianChernoffUnion,
            epsilon_gaussian_chernoff(a.sigma, a.m, a.codecs, a.criteria, a.delta)?,
        ),
    ];
    let mut out = format!(
        "m={} codecs={} criteria={} delta={} sigma={} emd={}\n{:<24} {:>12} {:>12}\n",
        a.m, a.codecs, a.criteria, a.delta, a.sigma, a.emd, "method", "half_width", "width"
    );
    for (method, eps) in rows {
        out.push_str(&format!("{:<24} {:>12.6} {:>12.6}\n", method.tag(), eps, 2.0 * eps));
    }
    let h = a.codecs as f64;
    let asym = DominanceCase::AsymptoticEmd {
        sigma: sigma_sq.sqrt(),
    };
    out.push_str(&format!(
        "hoeffding_dominates finite_sample_emd {}\n\
         hoeffding_dominates asymptotic_emd {}\n\
         hoeffding_dominates asymptotic_emd (rederived) {}\n",
        hoeffding_dominates(DominanceCase::FiniteSampleEmd, h, a.delta),
        hoeffding_dominates(asym, h, a.delta),
        hoeffding_dominates_rederived(asym, h, a.delta),
    ));
    print(&out)?;
    Ok(exit::CERTIFIED)
}
