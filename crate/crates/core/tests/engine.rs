use periodic_timetable::engine::*;
use periodic_timetable::instances::{build_cs1, micro_suite};
use periodic_timetable::model::*;
use periodic_timetable::oracle::{exhaustive_min, DEFAULT_SPACE_CAP};

fn lone_train() -> Instance {
    Instance {
        period: 60,
        stations: vec!["A".into(), "B".into(), "C".into()],
        segments: vec![],
        trains: vec![Train {
            id: "t".into(),
            basic_headway: 2,
            route: vec![
                Trip::new("A", "B", Window::new(5, 8), Some(Window::new(1, 2))),
                Trip::new("B", "C", Window::new(3, 4), None),
            ],
        }],
        connections: vec![],
        weights: WeightConfig::default(),
        note: None,
    }
}

fn small_config(seed: u64, budget: u64) -> GaConfig {
    GaConfig {
        population_size: 40,
        max_evaluations: budget,
        seed,
        ..GaConfig::default()
    }
}

#[test]
fn same_seed_same_run() {
    let inst = build_cs1();
    let cs = derive_bounds(&inst).unwrap();
    let cfg = small_config(11, 4_000);
    let a = run(&inst, &cs, &cfg).unwrap();
    let b = run(&inst, &cs, &cfg).unwrap();
    assert_eq!(a.best_genotype, b.best_genotype);
    assert_eq!(
        (a.best_fitness, a.evaluations_used, a.generations, a.terminated_by),
        (b.best_fitness, b.evaluations_used, b.generations, b.terminated_by)
    );
    let c = run(&inst, &cs, &small_config(12, 4_000)).unwrap();
    assert_ne!(a.best_genotype, c.best_genotype);
}

#[test]
fn instance_without_pairwise_constraints_stops_after_initial_population() {
    let inst = lone_train();
    let cs = derive_bounds(&inst).unwrap();
    let r = run(&inst, &cs, &GaConfig::default()).unwrap();
    assert_eq!(r.terminated_by, Termination::OptimumFound);
    assert_eq!(r.evaluations_used, 300);
    assert_eq!(r.generations, 0);
    assert_eq!(r.best_fitness, 0);
    assert!(r.report.is_fully_feasible());
}

#[test]
fn best_of_population_never_gets_worse() {
    let inst = build_cs1();
    let cs = derive_bounds(&inst).unwrap();
    let ga = Ga::new(&inst, &cs, &small_config(3, 1_000_000)).unwrap();
    let mut state = ga.initial_state();
    let mut prev = state.population_best();
    for _ in 0..200 {
        state = ga.step_generation(state);
        let now = state.population_best();
        assert!(now <= prev);
        assert_eq!(now, state.best_fitness);
        prev = now;
    }
}

#[test]
fn identical_population_is_a_fixed_point_without_mutation() {
    let inst = build_cs1();
    let cs = derive_bounds(&inst).unwrap();
    let cfg = GaConfig {
        mutation_rate_per_gene: Some(0.0),
        ..small_config(5, 1_000_000)
    };
    let ga = Ga::new(&inst, &cs, &cfg).unwrap();
    let mut state = ga.initial_state();
    let g = state.population[7].clone();
    let f = ga.fitness(&g);
    state.population.iter_mut().for_each(|p| *p = g.clone());
    state.fitness.iter_mut().for_each(|x| *x = f);
    for _ in 0..5 {
        state = ga.step_generation(state);
    }
    assert!(state.population.iter().all(|p| *p == g));
    assert!(state.fitness.iter().all(|&x| x == f));
}

#[test]
fn evaluation_budget_is_respected() {
    let inst = build_cs1();
    let cs = derive_bounds(&inst).unwrap();
    for (pop, budget) in [(40, 40), (40, 41), (40, 1_001), (7, 100), (300, 30_000)] {
        let cfg = GaConfig {
            population_size: pop,
            max_evaluations: budget,
            elite_count: 1.min(pop - 1),
            ..GaConfig::default()
        };
        let r = run(&inst, &cs, &cfg).unwrap();
        assert!(r.evaluations_used <= budget);
        if r.terminated_by == Termination::EvalLimit {
            assert_eq!(r.evaluations_used, budget, "pop {pop}");
        }
    }
}

#[test]
fn result_report_matches_best_genotype() {
    let inst = build_cs1();
    let cs = derive_bounds(&inst).unwrap();
    let r = run(&inst, &cs, &small_config(1, 2_000)).unwrap();
    let tt = periodic_timetable::codec::decode(&r.best_genotype, &inst).unwrap();
    let report = evaluate(&tt, &cs, &inst.weights).unwrap();
    assert_eq!(report, r.report);
    assert_eq!(report.weighted_fitness, r.best_fitness);
    assert_eq!(report.violations_by_type.hard(), r.hard_violations);
    assert_eq!(report.violations_by_type.soft(), r.soft_violations);
}

#[test]
fn engine_never_beats_the_exhaustive_optimum() {
    for inst in micro_suite() {
        let cs = derive_bounds(&inst).unwrap();
        let best = exhaustive_min(&inst, 1, DEFAULT_SPACE_CAP).unwrap().min_fitness;
        for seed in 0..3 {
            let r = run(&inst, &cs, &small_config(seed, 2_000)).unwrap();
            assert!(r.best_fitness >= best);
        }
    }
}

#[test]
fn invalid_configurations_are_rejected() {
    let inst = lone_train();
    let cs = derive_bounds(&inst).unwrap();
    let bad = [
        GaConfig { population_size: 1, ..GaConfig::default() },
        GaConfig { max_evaluations: 10, ..GaConfig::default() },
        GaConfig { elite_count: 300, ..GaConfig::default() },
        GaConfig { tournament_size: 0, ..GaConfig::default() },
        GaConfig { tournament_size: 301, ..GaConfig::default() },
        GaConfig { crossover_rate: 1.5, ..GaConfig::default() },
        GaConfig { mutation_rate_per_gene: Some(-0.1), ..GaConfig::default() },
    ];
    for cfg in bad {
        assert!(matches!(run(&inst, &cs, &cfg), Err(EngineError::ConfigInvalid(_))), "{cfg:?}");
    }
}
