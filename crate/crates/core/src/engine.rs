//! Generational genetic algorithm over timetable genotypes.
//!
//! Each generation keeps the `elite_count` best individuals and fills the
//! rest of the population with offspring from tournament selection, one-point
//! crossover and per-gene resampling mutation. Every decoded and scored
//! offspring counts as one evaluation; cached elite scores do not. A run stops
//! when a generation contains an individual with fitness 0 or when the
//! evaluation budget is spent.
//!
//! Fitness is the weighted count of violated headway, single-track and
//! connection constraints. Running and dwell constraints are left out because
//! decoding cannot violate them.

use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::codec::{random_genotype, CodecError, Decoder, GeneBounds, Genotype};
use crate::model::{
    evaluate, CompiledConstraints, ConstraintKind, EvaluationReport, Instance, Minutes,
    ModelError, PeriodicConstraint, WeightConfig,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid GA configuration: {0}")]
    ConfigInvalid(String),
    #[error("parents differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub max_evaluations: u64,
    pub crossover_rate: f64,
    /// Per-gene mutation probability; `None` means `1 / genotype length`.
    pub mutation_rate_per_gene: Option<f64>,
    pub tournament_size: usize,
    pub elite_count: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 300,
            max_evaluations: 30_000,
            crossover_rate: 0.9,
            mutation_rate_per_gene: None,
            tournament_size: 2,
            elite_count: 1,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |msg: String| Err(EngineError::ConfigInvalid(msg));
        if self.population_size < 2 {
            return bad(format!("population size {} < 2", self.population_size));
        }
        if self.max_evaluations < self.population_size as u64 {
            return bad(format!(
                "evaluation budget {} is smaller than the population {}",
                self.max_evaluations, self.population_size
            ));
        }
        if self.elite_count >= self.population_size {
            return bad(format!(
                "elite count {} leaves no room for offspring in a population of {}",
                self.elite_count, self.population_size
            ));
        }
        if self.tournament_size < 1 || self.tournament_size > self.population_size {
            return bad(format!(
                "tournament size {} must lie in [1, {}]",
                self.tournament_size, self.population_size
            ));
        }
        let rate_ok = |r: f64| (0.0..=1.0).contains(&r);
        if !rate_ok(self.crossover_rate) {
            return bad(format!("crossover rate {} outside [0, 1]", self.crossover_rate));
        }
        if let Some(r) = self.mutation_rate_per_gene {
            if !rate_ok(r) {
                return bad(format!("mutation rate {r} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    OptimumFound,
    EvalLimit,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::OptimumFound => "optimum",
            Termination::EvalLimit => "eval_limit",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub best_genotype: Genotype,
    pub best_fitness: u64,
    pub hard_violations: usize,
    pub soft_violations: usize,
    pub evaluations_used: u64,
    pub generations: u64,
    pub wall_time: Duration,
    pub terminated_by: Termination,
    /// Full evaluation of the best individual against every constraint.
    pub report: EvaluationReport,
}

/// Population snapshot between generations.
#[derive(Debug, Clone)]
pub struct GaState {
    pub population: Vec<Genotype>,
    pub fitness: Vec<u64>,
    pub generation: u64,
    pub evaluations: u64,
    pub best: Genotype,
    pub best_fitness: u64,
    rng: ChaCha8Rng,
    scratch: Vec<Minutes>,
}

impl GaState {
    /// Best fitness among the current population.
    pub fn population_best(&self) -> u64 {
        self.fitness.iter().copied().min().unwrap_or(u64::MAX)
    }
}

/// Index of the tournament winner: `tournament_size` distinct individuals
/// are drawn uniformly, the lowest fitness wins and ties go to the lower
/// index.
pub fn select_parent<R: Rng + ?Sized>(fitness: &[u64], tournament_size: usize, rng: &mut R) -> usize {
    assert!(!fitness.is_empty(), "empty population");
    let k = tournament_size.clamp(1, fitness.len());
    sample(rng, fitness.len(), k)
        .into_iter()
        .min_by_key(|&i| (fitness[i], i))
        .expect("tournament is nonempty")
}

/// One-point crossover with probability `rate`; the cut lies in
/// `[1, len - 1]` so both children mix genes. Otherwise the parents are
/// cloned.
pub fn crossover<R: Rng + ?Sized>(
    a: &Genotype,
    b: &Genotype,
    rate: f64,
    rng: &mut R,
) -> Result<(Genotype, Genotype), EngineError> {
    if a.len() != b.len() {
        return Err(EngineError::LengthMismatch(a.len(), b.len()));
    }
    let mut c1 = a.clone();
    let mut c2 = b.clone();
    if a.len() >= 2 && rng.gen_bool(rate) {
        let cut = rng.gen_range(1..a.len());
        c1.0[cut..].copy_from_slice(&b.0[cut..]);
        c2.0[cut..].copy_from_slice(&a.0[cut..]);
    }
    Ok((c1, c2))
}

/// Resamples each gene uniformly within its bounds with probability `rate`.
pub fn mutate<R: Rng + ?Sized>(g: &mut Genotype, bounds: &GeneBounds, rate: f64, rng: &mut R) {
    for (gene, w) in g.0.iter_mut().zip(bounds.windows()) {
        if rng.gen_bool(rate) {
            *gene = rng.gen_range(w.lo..=w.hi);
        }
    }
}

/// A configured GA bound to one instance.
#[derive(Debug, Clone)]
pub struct Ga {
    decoder: Decoder,
    pairwise: CompiledConstraints,
    constraints: Vec<PeriodicConstraint>,
    weights: WeightConfig,
    config: GaConfig,
    mutation_rate: f64,
}

impl Ga {
    pub fn new(
        instance: &Instance,
        constraints: &[PeriodicConstraint],
        config: &GaConfig,
    ) -> Result<Self, EngineError> {
        config.validate()?;
        let decoder = Decoder::new(instance);
        let compiled = CompiledConstraints::compile(constraints, decoder.layout(), instance.period)?;
        let pairwise = compiled.filtered(|k| {
            !matches!(k, ConstraintKind::Running | ConstraintKind::Dwell)
        });
        let len = decoder.bounds().len().max(1);
        let mutation_rate = config.mutation_rate_per_gene.unwrap_or(1.0 / len as f64);
        Ok(Self {
            decoder,
            pairwise,
            constraints: constraints.to_vec(),
            weights: instance.weights,
            config: config.clone(),
            mutation_rate,
        })
    }

    pub fn config(&self) -> &GaConfig {
        &self.config
    }

    pub fn decoder(&self) -> &Decoder {
        &self.decoder
    }

    pub fn bounds(&self) -> &GeneBounds {
        self.decoder.bounds()
    }

    /// Weighted count of violated headway, single-track and connection
    /// constraints.
    pub fn fitness(&self, g: &Genotype) -> u64 {
        let mut scratch = Vec::new();
        self.fitness_with(g, &mut scratch)
    }

    fn fitness_with(&self, g: &Genotype, scratch: &mut Vec<Minutes>) -> u64 {
        self.decoder.decode_times_into(&g.0, scratch);
        self.pairwise.fitness(scratch, &self.weights)
    }

    fn remaining(&self, state: &GaState) -> u64 {
        self.config.max_evaluations - state.evaluations
    }

    fn record(&self, state: &mut GaState, g: Genotype) {
        let f = self.fitness_with(&g, &mut state.scratch);
        state.evaluations += 1;
        if f < state.best_fitness {
            state.best_fitness = f;
            state.best = g.clone();
        }
        state.population.push(g);
        state.fitness.push(f);
    }

    /// Random initial population, fully evaluated.
    pub fn initial_state(&self) -> GaState {
        let mut state = GaState {
            population: Vec::with_capacity(self.config.population_size),
            fitness: Vec::with_capacity(self.config.population_size),
            generation: 0,
            evaluations: 0,
            best: Genotype::default(),
            best_fitness: u64::MAX,
            rng: ChaCha8Rng::seed_from_u64(self.config.seed),
            scratch: Vec::new(),
        };
        for _ in 0..self.config.population_size {
            let g = random_genotype(self.bounds(), &mut state.rng);
            self.record(&mut state, g);
        }
        state
    }

    /// Elites (best by fitness, ties by index) carry over with their cached
    /// fitness; offspring fill the population, stopping early if the budget
    /// runs out.
    pub fn step_generation(&self, mut state: GaState) -> GaState {
        let n = self.config.population_size;
        let mut order: Vec<usize> = (0..state.population.len()).collect();
        order.sort_by_key(|&i| (state.fitness[i], i));

        let parents = std::mem::take(&mut state.population);
        let parent_fitness = std::mem::take(&mut state.fitness);
        for &i in order.iter().take(self.config.elite_count) {
            state.population.push(parents[i].clone());
            state.fitness.push(parent_fitness[i]);
        }

        while state.population.len() < n && self.remaining(&state) > 0 {
            let a = select_parent(&parent_fitness, self.config.tournament_size, &mut state.rng);
            let b = select_parent(&parent_fitness, self.config.tournament_size, &mut state.rng);
            let (mut c1, mut c2) =
                crossover(&parents[a], &parents[b], self.config.crossover_rate, &mut state.rng)
                    .expect("population genotypes share one length");
            mutate(&mut c1, self.bounds(), self.mutation_rate, &mut state.rng);
            mutate(&mut c2, self.bounds(), self.mutation_rate, &mut state.rng);
            for child in [c1, c2] {
                if state.population.len() < n && self.remaining(&state) > 0 {
                    self.record(&mut state, child);
                }
            }
        }
        state.generation += 1;
        state
    }

    pub fn run(&self) -> Result<RunResult, EngineError> {
        let start = Instant::now();
        let mut state = self.initial_state();
        while state.best_fitness > 0 && self.remaining(&state) > 0 {
            state = self.step_generation(state);
        }
        let terminated_by = if state.best_fitness == 0 {
            Termination::OptimumFound
        } else {
            Termination::EvalLimit
        };

        let tt = self.decoder.decode(&state.best)?;
        let report = evaluate(&tt, &self.constraints, &self.weights)?;
        let structural = report.violations_by_type.get(ConstraintKind::Running)
            + report.violations_by_type.get(ConstraintKind::Dwell);
        debug_assert_eq!(structural, 0);
        debug_assert_eq!(report.weighted_fitness, state.best_fitness);

        Ok(RunResult {
            best_fitness: state.best_fitness,
            hard_violations: report.violations_by_type.hard(),
            soft_violations: report.violations_by_type.soft(),
            best_genotype: state.best,
            evaluations_used: state.evaluations,
            generations: state.generation,
            wall_time: start.elapsed(),
            terminated_by,
            report,
        })
    }
}

/// Runs the GA once on `instance` with constraints from
/// [`derive_bounds`](crate::model::derive_bounds).
pub fn run(
    instance: &Instance,
    constraints: &[PeriodicConstraint],
    config: &GaConfig,
) -> Result<RunResult, EngineError> {
    Ga::new(instance, constraints, config)?.run()
}
