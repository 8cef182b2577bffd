//! Multi-run experiments: seeded GA runs over a grid of population sizes and
//! evaluation limits, aggregated into one row per limit.

use std::path::PathBuf;
use std::str::FromStr;

use periodic_timetable::engine::{run, EngineError, GaConfig, RunResult};
use periodic_timetable::instances::{load, LoadError};
use periodic_timetable::model::{derive_bounds, ConstraintKind, Instance, ModelError, WeightConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Partial weight assignment such as `w_h=100,w_s=100,w_c=1`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WeightOverride(pub Vec<(ConstraintKind, u64)>);

impl WeightOverride {
    pub fn apply(&self, weights: &mut WeightConfig) {
        for &(kind, w) in &self.0 {
            weights.set(kind, w);
        }
    }
}

impl FromStr for WeightOverride {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got {part:?}"))?;
            let kind = match key.trim() {
                "w_r" | "w_running" => ConstraintKind::Running,
                "w_d" | "w_dwell" => ConstraintKind::Dwell,
                "w_h" | "w_headway" => ConstraintKind::Headway,
                "w_s" | "w_single" => ConstraintKind::SingleTrack,
                "w_c" | "w_connection" => ConstraintKind::Connection,
                other => return Err(format!("unknown weight {other:?}")),
            };
            let value = value
                .trim()
                .parse()
                .map_err(|_| format!("weight {key} must be a non-negative integer, got {value:?}"))?;
            out.push((kind, value));
        }
        if out.is_empty() {
            return Err("empty weight override".into());
        }
        Ok(Self(out))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub instance: PathBuf,
    pub pops: Vec<usize>,
    pub limits: Vec<u64>,
    pub runs: u64,
    pub base_seed: u64,
    pub weights: Option<WeightOverride>,
    /// Concurrent runs; `None` uses every core.
    pub workers: Option<usize>,
    /// GA settings other than population, budget and seed.
    pub ga: GaConfig,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::InvalidSpec(m.into()));
        if self.runs == 0 {
            return bad("runs must be at least 1");
        }
        if self.pops.is_empty() || self.limits.is_empty() {
            return bad("population sizes and evaluation limits must be nonempty");
        }
        if self.workers == Some(0) {
            return bad("worker count must be at least 1");
        }
        Ok(())
    }

    /// Loads the instance and applies the weight override.
    pub fn load_instance(&self) -> Result<Instance, ExperimentError> {
        let mut instance = load(&self.instance)?;
        if let Some(w) = &self.weights {
            w.apply(&mut instance.weights);
            instance.validate().map_err(LoadError::from)?;
        }
        Ok(instance)
    }

    pub fn cell_count(&self) -> usize {
        self.pops.len() * self.limits.len()
    }

    /// Seed of run `run` in cell `limit_idx * |pops| + pop_idx`.
    pub fn seed(&self, cell: usize, run: u64) -> u64 {
        self.base_seed + cell as u64 * self.runs + run
    }

    /// Every run of the grid ordered by (cell, run index).
    pub fn jobs(&self) -> Vec<Job> {
        let mut out = Vec::with_capacity(self.cell_count() * self.runs as usize);
        for (li, &max_evals) in self.limits.iter().enumerate() {
            for (pi, &pop_size) in self.pops.iter().enumerate() {
                let cell = li * self.pops.len() + pi;
                for run in 0..self.runs {
                    out.push(Job {
                        cell,
                        run,
                        max_evals,
                        pop_size,
                        seed: self.seed(cell, run),
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Job {
    pub cell: usize,
    pub run: u64,
    pub max_evals: u64,
    pub pop_size: usize,
    pub seed: u64,
}

/// One line of the per-run detail CSV. `time_s` is the only column that
/// varies between repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub max_evals: u64,
    pub pop_size: usize,
    pub run: u64,
    pub seed: u64,
    pub best_fitness: u64,
    pub hard: usize,
    pub soft: usize,
    pub evaluations: u64,
    pub generations: u64,
    pub terminated_by: String,
    pub time_s: f64,
}

impl RunRecord {
    fn new(job: &Job, r: &RunResult) -> Self {
        Self {
            max_evals: job.max_evals,
            pop_size: job.pop_size,
            run: job.run,
            seed: job.seed,
            best_fitness: r.best_fitness,
            hard: r.hard_violations,
            soft: r.soft_violations,
            evaluations: r.evaluations_used,
            generations: r.generations,
            terminated_by: r.terminated_by.as_str().to_owned(),
            time_s: r.wall_time.as_secs_f64(),
        }
    }

    pub fn feasible(&self) -> bool {
        self.hard == 0
    }

    pub fn fully_feasible(&self) -> bool {
        self.hard == 0 && self.soft == 0
    }
}

/// Runs the whole grid. Records come back in job order regardless of which
/// worker finished first.
pub fn run_experiment(instance: &Instance, spec: &ExperimentSpec) -> Result<Vec<RunRecord>, ExperimentError> {
    spec.validate()?;
    let constraints = derive_bounds(instance)?;
    let jobs = spec.jobs();
    let configs: Vec<GaConfig> = jobs
        .iter()
        .map(|j| GaConfig {
            population_size: j.pop_size,
            max_evaluations: j.max_evals,
            seed: j.seed,
            ..spec.ga.clone()
        })
        .collect();
    // Reject bad settings before starting any work.
    for c in &configs {
        c.validate()?;
    }

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = spec.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    pool.install(|| {
        jobs.par_iter()
            .zip(configs.par_iter())
            .map(|(job, cfg)| {
                let r = run(instance, &constraints, cfg)?;
                log::debug!(
                    "cell {} run {} (pop {}, limit {}): fitness {}",
                    job.cell,
                    job.run,
                    job.pop_size,
                    job.max_evals,
                    r.best_fitness
                );
                Ok(RunRecord::new(job, &r))
            })
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub max_evaluations: u64,
    /// Set only for per-size breakdowns.
    pub pop_size: Option<usize>,
    pub runs: usize,
    pub avg_hard_violations: f64,
    pub avg_soft_violations: f64,
    pub pct_feasible: f64,
    pub pct_feasible_and_connections: f64,
    pub avg_time_seconds: f64,
}

impl AggregateRow {
    fn from_records(max_evaluations: u64, pop_size: Option<usize>, records: &[&RunRecord]) -> Self {
        let n = records.len() as f64;
        let mean = |f: &dyn Fn(&RunRecord) -> f64| records.iter().map(|r| f(r)).sum::<f64>() / n;
        let pct = |f: &dyn Fn(&RunRecord) -> bool| {
            100.0 * records.iter().filter(|r| f(r)).count() as f64 / n
        };
        Self {
            max_evaluations,
            pop_size,
            runs: records.len(),
            avg_hard_violations: mean(&|r| r.hard as f64),
            avg_soft_violations: mean(&|r| r.soft as f64),
            pct_feasible: pct(&RunRecord::feasible),
            pct_feasible_and_connections: pct(&RunRecord::fully_feasible),
            avg_time_seconds: mean(&|r| r.time_s),
        }
    }
}

/// One row per evaluation limit, pooling every population size; with
/// `per_size` one row per (limit, population size) instead. Rows follow the
/// first appearance of each key in `records`.
pub fn aggregate(records: &[RunRecord], per_size: bool) -> Vec<AggregateRow> {
    let mut keys: Vec<(u64, Option<usize>)> = Vec::new();
    for r in records {
        let key = (r.max_evals, per_size.then_some(r.pop_size));
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(limit, pop)| {
            let group: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.max_evals == limit && pop.is_none_or(|p| p == r.pop_size))
                .collect();
            AggregateRow::from_records(limit, pop, &group)
        })
        .collect()
}

pub const AGGREGATE_HEADER: [&str; 6] = [
    "max_evals",
    "avg_hard",
    "avg_soft",
    "pct_feasible",
    "pct_feasible_conn",
    "avg_time_s",
];

pub fn aggregate_csv(rows: &[AggregateRow], per_size: bool) -> Result<String, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = AGGREGATE_HEADER.to_vec();
    if per_size {
        header.insert(1, "pop_size");
    }
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![row.max_evaluations.to_string()];
        if per_size {
            rec.push(row.pop_size.map(|p| p.to_string()).unwrap_or_default());
        }
        rec.extend([
            format!("{:.4}", row.avg_hard_violations),
            format!("{:.4}", row.avg_soft_violations),
            format!("{:.2}", row.pct_feasible),
            format!("{:.2}", row.pct_feasible_and_connections),
            format!("{:.3}", row.avg_time_seconds),
        ]);
        w.write_record(&rec)?;
    }
    Ok(into_string(w))
}

pub fn detail_csv(records: &[RunRecord]) -> Result<String, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record([
            "max_evals", "pop_size", "run", "seed", "best_fitness", "hard", "soft", "evaluations",
            "generations", "terminated_by", "time_s",
        ])?;
    }
    Ok(into_string(w))
}

pub fn parse_detail_csv(text: &str) -> Result<Vec<RunRecord>, ExperimentError> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(Into::into)
}

fn into_string(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory writer cannot fail");
    String::from_utf8(bytes).expect("csv output is UTF-8")
}
