use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use periodic_timetable::engine::{run, GaConfig};
use periodic_timetable::instances::{
    build_cs1, generate_cs2_like, load, load_timetable, save, timetable_to_json, CS2_SEED,
};
use periodic_timetable::model::{derive_bounds, ClockTime, Instance};
use pttab::experiment::{
    aggregate, aggregate_csv, detail_csv, run_experiment, ExperimentError, ExperimentSpec,
    WeightOverride,
};
use pttab::render::{render_expansion, render_timetable};

const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(name = "pttab", version, about = "Periodic railway timetabling with a genetic algorithm")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the GA once and print the best timetable.
    ///
    /// Exit status: 0 when every constraint holds, 1 when only connections
    /// are violated, 2 when a hard constraint is violated.
    Solve(SolveArgs),
    /// Seeded runs over population sizes and evaluation limits, aggregated
    /// into one CSV row per limit.
    Experiment(ExperimentArgs),
    /// Render a timetable over several consecutive periods as clock times.
    Expand(ExpandArgs),
    /// Write one of the bundled instances as JSON.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct GaArgs {
    #[arg(long, default_value_t = 0.9)]
    crossover_rate: f64,
    /// Per-gene mutation probability [default: 1 / genotype length].
    #[arg(long)]
    mutation_rate: Option<f64>,
    #[arg(long, default_value_t = 2)]
    tournament: usize,
    #[arg(long, default_value_t = 1)]
    elite: usize,
}

impl GaArgs {
    fn config(&self) -> GaConfig {
        GaConfig {
            crossover_rate: self.crossover_rate,
            mutation_rate_per_gene: self.mutation_rate,
            tournament_size: self.tournament,
            elite_count: self.elite,
            ..GaConfig::default()
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 300)]
    pop: usize,
    #[arg(long, default_value_t = 30_000)]
    max_evals: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// e.g. w_h=100,w_s=100,w_c=1
    #[arg(long)]
    weights: Option<WeightOverride>,
    /// Also write the best timetable as JSON.
    #[arg(long)]
    timetable_out: Option<PathBuf>,
    #[command(flatten)]
    ga: GaArgs,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Population sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "300")]
    pop: Vec<usize>,
    /// Evaluation limits, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    max_evals: Vec<u64>,
    #[arg(long, default_value_t = 50)]
    runs: u64,
    /// Base seed; run r of cell c uses seed + c * runs + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    weights: Option<WeightOverride>,
    /// Write one row per run to this file.
    #[arg(long)]
    detail_csv: Option<PathBuf>,
    /// One row per (limit, population size) instead of pooling sizes.
    #[arg(long)]
    per_size: bool,
    /// Concurrent runs [default: number of cores].
    #[arg(long)]
    workers: Option<usize>,
    /// Write the aggregate table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    ga: GaArgs,
}

#[derive(Args)]
struct ExpandArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Timetable JSON as written by `solve --timetable-out`.
    #[arg(long)]
    timetable: PathBuf,
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Clock time of minute 0 of the first period.
    #[arg(long, default_value = "0:00")]
    epoch: ClockTime,
}

#[derive(Args)]
struct GenerateArgs {
    /// `cs1` or `cs2`.
    #[arg(value_parser = ["cs1", "cs2"])]
    which: String,
    /// Generator seed for `cs2`.
    #[arg(long, default_value_t = CS2_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure mapped to a sysexits-style status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Self { code: EXIT_USAGE, message: e.to_string() }
    }

    fn data(e: impl std::fmt::Display) -> Self {
        Self { code: EXIT_DATA, message: e.to_string() }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self { code: EXIT_IO, message: format!("cannot write {}: {e}", path.display()) }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::InvalidSpec(_) | ExperimentError::Engine(_) => Failure::usage(e),
            ExperimentError::Pool(_) => Failure { code: 70, message: e.to_string() },
            _ => Failure::data(e),
        }
    }
}

fn load_with_weights(path: &Path, weights: Option<&WeightOverride>) -> Result<Instance, Failure> {
    let mut instance = load(path).map_err(Failure::data)?;
    if let Some(w) = weights {
        w.apply(&mut instance.weights);
        instance.validate().map_err(Failure::data)?;
    }
    Ok(instance)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(path, e))
}

fn solve(args: SolveArgs) -> Result<u8, Failure> {
    let instance = load_with_weights(&args.instance, args.weights.as_ref())?;
    let constraints = derive_bounds(&instance).map_err(Failure::data)?;
    let config = GaConfig {
        population_size: args.pop,
        max_evaluations: args.max_evals,
        seed: args.seed,
        ..args.ga.config()
    };
    let result = run(&instance, &constraints, &config).map_err(Failure::usage)?;
    let tt = periodic_timetable::codec::decode(&result.best_genotype, &instance)
        .map_err(Failure::data)?;
    print!("{}", render_timetable(&instance, &tt).map_err(Failure::data)?);
    print!("{}", result.report);
    println!(
        "evaluations {}, generations {}, stopped by {}, {:.3} s",
        result.evaluations_used,
        result.generations,
        result.terminated_by.as_str(),
        result.wall_time.as_secs_f64()
    );
    if let Some(path) = &args.timetable_out {
        write(path, &timetable_to_json(&tt))?;
    }
    Ok(match (result.hard_violations, result.soft_violations) {
        (0, 0) => 0,
        (0, _) => 1,
        _ => 2,
    })
}

fn experiment(args: ExperimentArgs) -> Result<u8, Failure> {
    let spec = ExperimentSpec {
        instance: args.instance,
        pops: args.pop,
        limits: args.max_evals,
        runs: args.runs,
        base_seed: args.seed,
        weights: args.weights,
        workers: args.workers,
        ga: args.ga.config(),
    };
    spec.validate()?;
    let instance = spec.load_instance()?;
    let records = run_experiment(&instance, &spec)?;
    if let Some(path) = &args.detail_csv {
        write(path, &detail_csv(&records)?)?;
    }
    let table = aggregate_csv(&aggregate(&records, args.per_size), args.per_size)?;
    match &args.out {
        Some(path) => write(path, &table)?,
        None => print!("{table}"),
    }
    Ok(0)
}

fn expand(args: ExpandArgs) -> Result<u8, Failure> {
    let instance = load(&args.instance).map_err(Failure::data)?;
    let tt = load_timetable(&args.timetable).map_err(Failure::data)?;
    if tt.period() != instance.period {
        return Err(Failure::data(format!(
            "timetable period {} differs from instance period {}",
            tt.period(),
            instance.period
        )));
    }
    print!("{}", render_expansion(&instance, &tt, args.k, args.epoch).map_err(Failure::data)?);
    Ok(0)
}

fn generate(args: GenerateArgs) -> Result<u8, Failure> {
    let instance = match args.which.as_str() {
        "cs1" => build_cs1(),
        _ => generate_cs2_like(args.seed).map_err(Failure::data)?,
    };
    match &args.out {
        Some(path) => save(&instance, path).map_err(|e| Failure::io(path, e))?,
        None => print!("{}", periodic_timetable::instances::to_json_string(&instance)),
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Experiment(a) => experiment(a),
        Command::Expand(a) => expand(a),
        Command::Generate(a) => generate(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
