use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use patrolsynth::cli::{
    bound_report, compare, patrollers_for_target_with_tolerance, run_level_sweep,
    run_patroller_sweep, synthesize_report, CliError, GameSpecFile, LevelSweep, PatrollerSweep,
    StrategyFile,
};
use patrolsynth::evaluation::{simulate, AttackSpec};

#[derive(Parser)]
#[command(name = "patrolsynth", about = "Randomized patrolling strategies for fully connected security games", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Upper bound on the protection achievable with k patrollers
    Bound {
        spec: PathBuf,
        #[arg(short = 'k', long = "patrollers")]
        patrollers: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Synthesize a modular strategy and report its exact level
    Synthesize {
        spec: PathBuf,
        #[arg(short = 'k', long = "patrollers")]
        patrollers: u64,
        /// Write the factored strategy (JSON) here
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Patrollers needed for a target protection: lower bound and the counts
    /// required by the modular and naive strategies
    Patrollers {
        spec: PathBuf,
        #[arg(long)]
        protection: f64,
        /// Slack allowed when testing level >= target
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compare the modular strategy, the naive baseline, and the bound
    Compare {
        spec: PathBuf,
        #[arg(short = 'k', long = "patrollers")]
        patrollers: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Sweep over a scale factor (fixed k) or protection targets, writing CSV
    Sweep {
        spec: PathBuf,
        #[command(flatten)]
        range: SweepRange,
        /// Output CSV path (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the damage of one attack under a strategy file
    Simulate {
        strategy: PathBuf,
        spec: PathBuf,
        /// Retained basic-set record index (assignment order)
        #[arg(long)]
        record: usize,
        /// Vertex index within the set
        #[arg(long, default_value_t = 0)]
        vertex: u32,
        /// Attack start phase
        #[arg(long, default_value_t = 0)]
        phase: u32,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Args)]
struct SweepRange {
    /// Fixed patroller count for a scale sweep
    #[arg(short = 'k', long = "patrollers", required_unless_present = "tau_start")]
    patrollers: Option<u64>,
    #[arg(long, default_value_t = 1.0)]
    x_start: f64,
    #[arg(long, default_value_t = 3.0)]
    x_stop: f64,
    #[arg(long, default_value_t = 0.01)]
    x_step: f64,
    /// First protection target for a patroller sweep
    #[arg(long, conflicts_with = "patrollers")]
    tau_start: Option<f64>,
    #[arg(long, requires = "tau_start")]
    tau_stop: Option<f64>,
    #[arg(long, requires = "tau_start")]
    tau_step: Option<f64>,
}

fn load_spec(path: &PathBuf) -> Result<GameSpecFile, CliError> {
    GameSpecFile::parse(&fs::read_to_string(path)?)
}

fn emit<T: serde::Serialize>(format: Format, value: &T, text: String) {
    match format {
        Format::Text => println!("{text}"),
        Format::Json => println!("{}", serde_json::to_string_pretty(value).expect("serializable")),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bound { spec, patrollers, format } => {
            let spec = load_spec(&spec)?;
            let gs = spec.to_structure(patrollers)?;
            let report = bound_report(&gs, patrollers);
            let mut text = format!(
                "protection upper bound: {}\neffective patrollers: {}\nsaturated: {}",
                report.rho, report.effective_k, report.saturated
            );
            for g in &report.groups {
                text.push_str(&format!(
                    "\n  group count={} D={} cost={}: Q = {}",
                    g.count, g.attack_length, g.cost, g.q
                ));
            }
            emit(format, &report, text);
        }
        Command::Synthesize { spec, patrollers, output, format } => {
            let spec = load_spec(&spec)?;
            let gs = spec.to_structure(patrollers)?;
            let (file, report) = synthesize_report(&gs, patrollers)?;
            if let Some(path) = output {
                fs::write(path, file.to_json())?;
            }
            let text = format!(
                "level: {}\nupper bound: {}\nrelative deviation: {}\nbasic sets retained: {}, removed: {}",
                report.level,
                report.upper_bound,
                report.relative_deviation,
                file.strategy.assignment.sets.len(),
                file.strategy.assignment.removed.len()
            );
            emit(format, &file, text);
        }
        Command::Patrollers { spec, protection, tolerance, format } => {
            let spec = load_spec(&spec)?;
            let report = patrollers_for_target_with_tolerance(&spec, protection, tolerance)?;
            let mut text = format!(
                "target protection: {}\nlower bound: {}\nmodular strategy needs: {}\nnaive strategy needs: {}",
                report.target, report.k_bound, report.k_modular, report.k_naive
            );
            if let Some(note) = &report.note {
                text.push_str(&format!("\nnote: {note}"));
            }
            emit(format, &report, text);
        }
        Command::Compare { spec, patrollers, format } => {
            let spec = load_spec(&spec)?;
            let gs = spec.to_structure(patrollers)?;
            let report = compare(&gs, patrollers)?;
            let text = format!(
                "bound: {}\nmodular level: {} (gap {})\nnaive level: {} (gap {})",
                report.upper_bound,
                report.level_modular,
                report.gap_modular,
                report.level_naive,
                report.gap_naive
            );
            emit(format, &report, text);
        }
        Command::Sweep { spec, range, output } => {
            let spec = load_spec(&spec)?;
            let csv = if let Some(tau_start) = range.tau_start {
                let sweep = PatrollerSweep {
                    tau_start,
                    tau_stop: range.tau_stop.unwrap_or(tau_start),
                    tau_step: range.tau_step.unwrap_or(1.0),
                };
                run_patroller_sweep(&spec, &sweep)?
            } else {
                let sweep = LevelSweep {
                    x_start: range.x_start,
                    x_stop: range.x_stop,
                    x_step: range.x_step,
                    patrollers: range.patrollers.expect("clap enforces presence"),
                };
                run_level_sweep(&spec, &sweep)?
            };
            match output {
                Some(path) => fs::write(path, csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Simulate { strategy, spec, record, vertex, phase, trials, seed, format } => {
            let spec = load_spec(&spec)?;
            let file = StrategyFile::parse(&fs::read_to_string(strategy)?)?;
            let gs = spec.to_structure(file.strategy.patrollers)?;
            if gs.alpha_max() != file.strategy.alpha_max
                || gs.detection_prob() != file.strategy.detection_prob
            {
                return Err(CliError::Internal(
                    "strategy file does not match the game spec".to_string(),
                ));
            }
            if record >= file.strategy.assignment.sets.len() {
                return Err(CliError::Internal(format!(
                    "record index {record} out of range ({} retained sets)",
                    file.strategy.assignment.sets.len()
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let report = simulate(
                &file.strategy,
                Some(AttackSpec { record, vertex, start_phase: phase }),
                trials,
                &mut rng,
            );
            let text = format!(
                "trials: {}\nmean damage: {}\n95% CI half-width: {}",
                report.trials, report.mean_damage, report.ci_half_width
            );
            emit(format, &report, text);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
