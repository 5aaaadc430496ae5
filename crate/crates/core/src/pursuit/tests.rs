use super::*;
use crate::exact::exact_inference;
use crate::factor_graph::{gen_fully_connected, gen_grid};

fn spin(w: f64) -> Vec<f64> {
    vec![w.exp(), (-w).exp(), (-w).exp(), w.exp()]
}

/// Two disjoint 4-cycles, the first with coupling `w1`, the second with `w2`.
fn two_loops(w1: f64, w2: f64) -> FactorGraph {
    let mut factors: Vec<(Vec<usize>, Vec<f64>)> = (0..8).map(|v| (vec![v], vec![1.2, 0.8])).collect();
    for (base, w) in [(0, w1), (4, w2)] {
        for (a, b) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
            factors.push((vec![base + a, base + b], spin(w)));
        }
    }
    FactorGraph::new(vec![2; 8], factors).unwrap()
}

fn converged_bethe(fg: &FactorGraph) -> (RegionGraph, GbpRun) {
    let rg = RegionGraph::bethe(fg);
    let run = run_default(&rg, fg);
    assert!(run.state.converged);
    (rg, run)
}

fn run_default(rg: &RegionGraph, fg: &FactorGraph) -> GbpRun {
    GbpEngine::new(rg, fg).unwrap().run(&GbpOptions::default(), None).unwrap()
}

#[test]
fn square_grid_pool_is_the_square() {
    let fg = gen_grid(2, 2, 1.0, 0.5, 0).unwrap();
    let rg = RegionGraph::bethe(&fg);
    let pool = candidate_pool(&fg, &rg, &PursuitConfig::default()).unwrap();
    assert_eq!(pool, vec![loop_region(&fg, &[0, 1, 2, 3]).unwrap()]);
    assert_eq!(pool[0].factors, vec![4, 5, 6, 7]);
}

#[test]
fn fc7_triangle_pool_has_35_entries() {
    let fg = gen_fully_connected(7, 0.3, 0.5, 0).unwrap();
    let rg = RegionGraph::bethe(&fg);
    let config = PursuitConfig {
        max_loop_len: 3,
        ..PursuitConfig::default()
    };
    assert_eq!(candidate_pool(&fg, &rg, &config).unwrap().len(), 35);
}

#[test]
fn width_one_pool_is_empty() {
    let fg = gen_grid(3, 3, 1.0, 0.5, 0).unwrap();
    let rg = RegionGraph::bethe(&fg);
    let config = PursuitConfig {
        max_width: 1,
        ..PursuitConfig::default()
    };
    assert!(candidate_pool(&fg, &rg, &config).unwrap().is_empty());
    assert!(config.validate().is_err());
}

#[test]
fn uniform_model_scores_zero() {
    let fg = gen_grid(3, 3, 0.0, 0.0, 0).unwrap();
    let (rg, run) = converged_bethe(&fg);
    let square = Region::with_all_factors(&fg, vec![0, 1, 3, 4]).unwrap();
    let s = local_delta_f(&rg, &fg, &run.state, &square, &GbpOptions::default(), LocalScore::default()).unwrap();
    assert!(s.valid);
    assert!(s.value < 1e-12, "{}", s.value);
}

#[test]
fn square_local_score_equals_full_change() {
    let fg = gen_grid(2, 2, 1.0, 0.5, 5).unwrap();
    let (rg, run) = converged_bethe(&fg);
    let square = Region::with_all_factors(&fg, vec![0, 1, 2, 3]).unwrap();
    let local = local_delta_f(&rg, &fg, &run.state, &square, &GbpOptions::default(), LocalScore::FrozenDifference).unwrap();
    let mut bigger = rg.clone();
    bigger.add_outer_region(square, &fg).unwrap();
    let after = run_default(&bigger, &fg);
    let full = (rg_free_energy(&bigger, &fg, &after.beliefs).unwrap()
        - rg_free_energy(&rg, &fg, &run.beliefs).unwrap())
    .abs();
    assert!((local.value - full).abs() < 1e-8, "{} vs {full}", local.value);
}

#[test]
fn square_counting_change_is_bethe_gap_at_exact_marginals() {
    let fg = gen_grid(2, 2, 1.0, 0.5, 5).unwrap();
    let (rg, run) = converged_bethe(&fg);
    let square = Region::with_all_factors(&fg, vec![0, 1, 2, 3]).unwrap();
    let local = local_delta_f(&rg, &fg, &run.state, &square, &GbpOptions::default(), LocalScore::CountingChange).unwrap();
    // the square sees no outside messages, so its belief is the exact joint and
    // the old regions end at its marginals
    let exact = exact_inference(&fg).unwrap();
    let single = RegionGraph::from_parts(vec![square], &[]).unwrap();
    let joint = run_default(&single, &fg);
    let at_exact = crate::gbp::transfer_beliefs(&single, &joint.beliefs, &rg, &fg).unwrap();
    let gap = (-exact.log_partition - rg_free_energy(&rg, &fg, &at_exact).unwrap()).abs();
    assert!((local.value - gap).abs() < 1e-8, "{} vs {gap}", local.value);
}

#[test]
fn stronger_loop_scores_higher() {
    let fg = two_loops(1.5, 0.2);
    let (rg, run) = converged_bethe(&fg);
    let strong = Region::with_all_factors(&fg, vec![0, 1, 2, 3]).unwrap();
    let weak = Region::with_all_factors(&fg, vec![4, 5, 6, 7]).unwrap();
    let opts = GbpOptions::default();
    let a = local_delta_f(&rg, &fg, &run.state, &strong, &opts, LocalScore::default()).unwrap();
    let b = local_delta_f(&rg, &fg, &run.state, &weak, &opts, LocalScore::default()).unwrap();
    assert!(a.value > b.value, "{} <= {}", a.value, b.value);
}

#[test]
fn scoring_is_deterministic() {
    let fg = gen_grid(3, 3, 1.0, 0.5, 2).unwrap();
    let (rg, run) = converged_bethe(&fg);
    let square = Region::with_all_factors(&fg, vec![1, 2, 4, 5]).unwrap();
    let opts = GbpOptions::default();
    let a = local_delta_f(&rg, &fg, &run.state, &square, &opts, LocalScore::default()).unwrap();
    let b = local_delta_f(&rg, &fg, &run.state, &square, &opts, LocalScore::default()).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
}

#[test]
fn selection_follows_strategy() {
    let pool = vec![
        Region::new(vec![0, 1], vec![]).unwrap(),
        Region::new(vec![1, 2], vec![]).unwrap(),
    ];
    let scores = [Some(0.5), Some(0.1)];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert_eq!(select_regions(&pool, &scores, Strategy::Rp, 1, &mut rng).unwrap(), vec![0]);
    assert_eq!(select_regions(&pool, &scores, Strategy::RpMinus, 1, &mut rng).unwrap(), vec![1]);
    assert_eq!(select_regions(&pool, &[Some(0.2), Some(0.2)], Strategy::Rp, 1, &mut rng).unwrap(), vec![0]);
    assert_eq!(select_regions(&pool, &[None, Some(0.1)], Strategy::Rp, 1, &mut rng).unwrap(), vec![1]);
    assert!(matches!(select_regions(&[], &[], Strategy::Rp, 1, &mut rng), Err(Error::EmptyPool)));
}

#[test]
fn random_selection_is_reproducible() {
    let pool: Vec<Region> = (0..10).map(|v| Region::new(vec![v], vec![]).unwrap()).collect();
    let scores = vec![Some(0.0); 10];
    let draw = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..5)
            .map(|_| select_regions(&pool, &scores, Strategy::Rand, 2, &mut rng).unwrap())
            .collect::<Vec<_>>()
    };
    assert_eq!(draw(3), draw(3));
    assert_ne!(draw(3), draw(4));
}

#[test]
fn strategy_names_round_trip() {
    for s in Strategy::ALL {
        assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        assert_eq!(s.slug().parse::<Strategy>().unwrap(), s);
    }
    assert!("best".parse::<Strategy>().is_err());
}

#[test]
fn one_square_makes_the_square_grid_exact() {
    let fg = gen_grid(2, 2, 1.0, 0.5, 7).unwrap();
    let exact = exact_inference(&fg).unwrap();
    let config = PursuitConfig {
        max_regions: 1,
        ..PursuitConfig::default()
    };
    let trace = region_pursuit(&fg, &config, Some(&exact)).unwrap();
    assert_eq!(trace.records.len(), 2);
    let last = &trace.records[1];
    assert!(last.converged);
    assert!(last.l1_error.unwrap() < 1e-8);
    assert!((last.free_energy + exact.log_partition).abs() < 1e-8);
}

#[test]
fn zero_regions_gives_baseline_only() {
    let fg = gen_grid(3, 3, 1.0, 0.5, 1).unwrap();
    let config = PursuitConfig {
        max_regions: 0,
        ..PursuitConfig::default()
    };
    let trace = region_pursuit(&fg, &config, None).unwrap();
    assert_eq!(trace.records.len(), 1);
    assert_eq!(trace.records[0].strategy, BASELINE_LABEL);
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("iteration,strategy,chosen_region,score,free_energy,l1_error,gbp_iters,converged"));
}

#[test]
fn opt_without_oracle_is_rejected() {
    let fg = gen_grid(2, 2, 1.0, 0.5, 1).unwrap();
    let config = PursuitConfig {
        strategy: Strategy::Opt,
        ..PursuitConfig::default()
    };
    assert!(matches!(region_pursuit(&fg, &config, None), Err(Error::OracleInfeasible(_))));
}

#[test]
fn fc7_pursuit_improves_on_bethe() {
    let fg = gen_fully_connected(7, 0.3, 0.5, 0).unwrap();
    let exact = exact_inference(&fg).unwrap();
    let config = PursuitConfig {
        max_regions: 10,
        max_loop_len: 3,
        ..PursuitConfig::default()
    };
    let trace = region_pursuit(&fg, &config, Some(&exact)).unwrap();
    assert_eq!(trace.records.len(), 11);
    assert!(trace.records.iter().all(|r| r.converged));
    assert!(trace.records[1..].iter().all(|r| r.chosen_scores[0] > 0.0));
    let base = trace.records[0].l1_error.unwrap();
    let last = trace.records.last().unwrap().l1_error.unwrap();
    assert!(last < base, "{last} vs {base}");
    assert!(trace.region_graph.check_validity(&fg).is_valid());
}

#[test]
fn random_traces_average_keeps_baseline() {
    let fg = gen_grid(3, 3, 1.0, 0.5, 1).unwrap();
    let traces: Vec<PursuitTrace> = (0..3)
        .map(|seed| {
            let config = PursuitConfig {
                strategy: Strategy::Rand,
                max_regions: 2,
                seed,
                ..PursuitConfig::default()
            };
            region_pursuit(&fg, &config, None).unwrap()
        })
        .collect();
    let avg = average_traces(&traces);
    assert_eq!(avg.len(), 3);
    assert_eq!(avg[0], traces[0].records[0]);
    assert!(avg[1].chosen.is_empty());
}
