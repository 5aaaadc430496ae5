use super::*;
use crate::exact::exact_brute_force;
use crate::factor_graph::{gen_fully_connected, gen_grid, gen_tree, FactorGraph};
use crate::region_graph::Region;

fn two_node(table: Vec<f64>) -> FactorGraph {
    FactorGraph::new(vec![2, 2], vec![(vec![0, 1], table)]).unwrap()
}

fn small_model() -> FactorGraph {
    FactorGraph::new(
        vec![2, 3, 2],
        vec![
            (vec![0], vec![1.0, 2.0]),
            (vec![0, 1], vec![1.0, 0.5, 2.0, 1.5, 0.3, 1.0]),
            (vec![1, 2], vec![0.7, 1.2, 1.0, 2.5, 0.4, 0.9]),
            (vec![0, 2], vec![2.0, 1.0, 1.0, 3.0]),
        ],
    )
    .unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn u_set_of_bethe_factor_region_collects_other_parents() {
    let fg = gen_grid(2, 2, 1.0, 0.5, 1).unwrap();
    let rg = RegionGraph::bethe(&fg);
    let nf = fg.num_factors();
    for a in 0..nf {
        let mut expected = Vec::new();
        for &child in rg.children(a) {
            for &p in rg.parents(child) {
                if p != a {
                    expected.push((p, child));
                }
            }
        }
        expected.sort_unstable();
        assert_eq!(u_set(&rg, a).unwrap(), expected);
    }
    for v in 0..fg.num_vars() {
        let r = nf + v;
        let expected: Vec<_> = rg.parents(r).iter().map(|&p| (p, r)).collect();
        assert_eq!(u_set(&rg, r).unwrap(), expected);
    }
}

#[test]
fn u_set_of_single_region_is_empty() {
    let rg = RegionGraph::from_parts(vec![Region::new(vec![0, 1], vec![0]).unwrap()], &[]).unwrap();
    assert!(u_set(&rg, 0).unwrap().is_empty());
    assert!(u_set(&rg, 3).is_err());
}

#[test]
fn outer_region_over_fc3_gives_exact_joint() {
    let fg = gen_fully_connected(3, 1.0, 0.5, 4).unwrap();
    let all = Region::with_all_factors(&fg, vec![0, 1, 2]).unwrap();
    let mut regions = vec![all];
    let mut edges = Vec::new();
    for v in 0..3 {
        regions.push(Region::new(vec![v], vec![]).unwrap());
        edges.push((0, v + 1));
    }
    let rg = RegionGraph::from_parts(regions, &edges).unwrap();
    let run = run_gbp(&rg, &fg, &GbpOptions::default(), None).unwrap();
    assert!(run.state.converged);
    let exact = exact_brute_force(&fg).unwrap();
    let log_z = exact.log_partition;
    let joint: Vec<f64> = (0..8)
        .map(|k| {
            let x = crate::factor_graph::Assignment(vec![(k >> 2) & 1, (k >> 1) & 1, k & 1]);
            (fg.log_unnormalized_joint(&x).unwrap() - log_z).exp()
        })
        .collect();
    assert!(max_abs_diff(&run.beliefs.tables[0], &joint) < 1e-12);
    let f = rg_free_energy(&rg, &fg, &run.beliefs).unwrap();
    assert!((f + log_z).abs() < 1e-10);
}

#[test]
fn uniform_messages_and_factors_give_uniform_belief() {
    let fg = two_node(vec![3.0; 4]);
    let rg = RegionGraph::bethe(&fg);
    let engine = GbpEngine::new(&rg, &fg).unwrap();
    let state = engine.initial_state(&GbpOptions::default(), None);
    for r in 0..rg.len() {
        let b = engine.belief(&state, r);
        let u = 1.0 / b.len() as f64;
        assert!(b.iter().all(|&x| (x - u).abs() < 1e-15));
    }
}

#[test]
fn variable_region_belief_is_product_of_parent_messages() {
    let fg = gen_grid(2, 2, 1.0, 0.5, 9).unwrap();
    let rg = RegionGraph::bethe(&fg);
    let engine = GbpEngine::new(&rg, &fg).unwrap();
    let opts = GbpOptions {
        random_init: true,
        seed: 5,
        ..GbpOptions::default()
    };
    let state = engine.initial_state(&opts, None);
    let r = fg.num_factors();
    let mut prod = [1.0; 2];
    for &p in rg.parents(r) {
        let m = state.messages[engine.edge_id(p, r).unwrap()].values();
        for x in 0..2 {
            prod[x] *= m[x];
        }
    }
    let z: f64 = prod.iter().sum();
    let prod: Vec<f64> = prod.iter().map(|p| p / z).collect();
    assert!(max_abs_diff(&engine.belief(&state, r), &prod) < 1e-14);
}

#[test]
fn update_is_identity_at_fixed_point() {
    let fg = gen_grid(3, 3, 1.0, 0.5, 2).unwrap();
    let rg = RegionGraph::bethe(&fg);
    let engine = GbpEngine::new(&rg, &fg).unwrap();
    let run = engine.run(&GbpOptions::default(), None).unwrap();
    assert!(run.state.converged);
    for e in 0..engine.edges().len() {
        let (fresh, clamps) = engine.updated_message(&run.state, e, 0.0);
        assert_eq!(clamps, 0);
        assert!(max_abs_diff(&fresh, &run.state.messages[e].log_values) < 1e-8);
    }
}

#[test]
fn one_undamped_sweep_on_two_nodes_matches_hand_bp() {
    let psi = vec![2.0, 0.5, 1.0, 3.0];
    let fg = two_node(psi.clone());
    let rg = RegionGraph::bethe(&fg);
    let opts = GbpOptions {
        damping: 0.0,
        max_iters: 1,
        ..GbpOptions::default()
    };
    let run = run_gbp(&rg, &fg, &opts, None).unwrap();
    // factor -> x0 sums out x1, factor -> x1 sums out x0, incoming variable messages are uniform
    let to0 = [psi[0] + psi[1], psi[2] + psi[3]];
    let to1 = [psi[0] + psi[2], psi[1] + psi[3]];
    for (want, child) in [(to0, 1), (to1, 2)] {
        let z: f64 = want.iter().sum();
        let got = run.state.messages.iter().find(|m| m.child == child).unwrap().values();
        assert!(max_abs_diff(&got, &[want[0] / z, want[1] / z]) < 1e-14);
    }
}

#[test]
fn zero_damping_equals_raw_update() {
    let fg = small_model();
    let rg = RegionGraph::bethe(&fg);
    let engine = GbpEngine::new(&rg, &fg).unwrap();
    let opts = GbpOptions {
        random_init: true,
        seed: 11,
        ..GbpOptions::default()
    };
    let state = engine.initial_state(&opts, None);
    for e in 0..engine.edges().len() {
        let (p, c) = engine.edges()[e];
        let bp = engine.belief(&state, p);
        let bc = engine.belief(&state, c);
        let cards: Vec<usize> = rg.region(p).vars.iter().map(|&v| fg.card(v)).collect();
        let proj = projection(&rg.region(p).vars, &cards, &rg.region(c).vars);
        let mut marg = vec![0.0; bc.len()];
        for (b, &ix) in bp.iter().zip(&proj) {
            marg[ix] += b;
        }
        let old = state.messages[e].values();
        let mut raw: Vec<f64> = (0..bc.len()).map(|x| marg[x] / bc[x] * old[x]).collect();
        let z: f64 = raw.iter().sum();
        raw.iter_mut().for_each(|v| *v /= z);
        let (fresh, _) = engine.updated_message(&state, e, 0.0);
        let fresh: Vec<f64> = fresh.iter().map(|v| v.exp()).collect();
        assert!(max_abs_diff(&fresh, &raw) < 1e-13);
    }
}

#[test]
fn tree_bethe_is_exact() {
    for seed in 0..5 {
        let fg = gen_tree(9, 1.0, 0.5, seed).unwrap();
        let rg = RegionGraph::bethe(&fg);
        let run = run_gbp(&rg, &fg, &GbpOptions::default(), None).unwrap();
        assert!(run.state.converged);
        let exact = exact_brute_force(&fg).unwrap();
        let marg = node_marginals(&rg, &fg, &run.beliefs).unwrap();
        for (m, e) in marg.iter().zip(&exact.node_marginals) {
            assert!(max_abs_diff(m, e) < 1e-8);
        }
        let f = rg_free_energy(&rg, &fg, &run.beliefs).unwrap();
        assert!((f + exact.log_partition).abs() < 1e-8, "{f} vs {}", -exact.log_partition);
    }
}

#[test]
fn uniform_model_converges_in_one_sweep() {
    let fg = gen_grid(3, 3, 0.0, 0.0, 0).unwrap();
    let rg = RegionGraph::bethe(&fg);
    let run = run_gbp(&rg, &fg, &GbpOptions::default(), None).unwrap();
    assert!(run.state.converged);
    assert_eq!(run.state.iteration, 1);
    for m in node_marginals(&rg, &fg, &run.beliefs).unwrap() {
        assert!(max_abs_diff(&m, &[0.5, 0.5]) < 1e-15);
    }
}

#[test]
fn strong_fully_connected_model_reports_instead_of_failing() {
    let fg = gen_fully_connected(7, 3.0, 0.1, 1).unwrap();
    let rg = RegionGraph::bethe(&fg);
    let opts = GbpOptions {
        damping: 0.0,
        max_iters: 30,
        ..GbpOptions::default()
    };
    let run = run_gbp(&rg, &fg, &opts, None).unwrap();
    assert_eq!(run.diagnostics.residuals.len(), run.state.iteration);
    for table in &run.beliefs.tables {
        assert!(table.iter().all(|b| b.is_finite()));
    }
}

#[test]
fn uniform_belief_free_energy_is_minus_log_states() {
    let fg = two_node(vec![1.0; 4]);
    let rg = RegionGraph::from_parts(vec![Region::new(vec![0, 1], vec![0]).unwrap()], &[]).unwrap();
    let beliefs = BeliefSet {
        tables: vec![vec![0.25; 4]],
    };
    let f = region_free_energy(&rg, &fg, &beliefs, 0).unwrap();
    assert!((f + 4f64.ln()).abs() < 1e-15);
}

#[test]
fn consistency_holds_at_convergence() {
    let fg = gen_grid(3, 3, 1.0, 0.5, 6).unwrap();
    let mut rg = RegionGraph::bethe(&fg);
    rg.add_outer_region(Region::with_all_factors(&fg, vec![0, 1, 3, 4]).unwrap(), &fg)
        .unwrap();
    let engine = GbpEngine::new(&rg, &fg).unwrap();
    let opts = GbpOptions::default();
    let run = engine.run(&opts, None).unwrap();
    assert!(run.state.converged);
    assert!(engine.max_inconsistency(&run.beliefs) <= 10.0 * opts.tolerance);
    for table in &run.beliefs.tables {
        assert!((table.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn rescaling_a_factor_shifts_free_energy_only() {
    let fg = small_model();
    let c: f64 = 7.5;
    let scaled = FactorGraph::new(
        fg.cardinalities().to_vec(),
        fg.factors()
            .iter()
            .enumerate()
            .map(|(k, f)| {
                let t = f.table();
                let t = if k == 2 { t.iter().map(|v| v * c).collect() } else { t };
                (f.scope.clone(), t)
            })
            .collect(),
    )
    .unwrap();
    let rg = RegionGraph::bethe(&fg);
    let a = run_gbp(&rg, &fg, &GbpOptions::default(), None).unwrap();
    let b = run_gbp(&rg, &scaled, &GbpOptions::default(), None).unwrap();
    for (x, y) in a.beliefs.tables.iter().zip(&b.beliefs.tables) {
        assert!(max_abs_diff(x, y) < 1e-9);
    }
    let fa = rg_free_energy(&rg, &fg, &a.beliefs).unwrap();
    let fb = rg_free_energy(&rg, &scaled, &b.beliefs).unwrap();
    assert!((fb - fa + c.ln()).abs() < 1e-9);
}

#[test]
fn random_schedule_reaches_the_same_fixed_point() {
    let fg = gen_grid(3, 3, 0.5, 0.5, 8).unwrap();
    let rg = RegionGraph::bethe(&fg);
    let a = run_gbp(&rg, &fg, &GbpOptions::default(), None).unwrap();
    let opts = GbpOptions {
        schedule: Schedule::RandomPermutation,
        seed: 3,
        ..GbpOptions::default()
    };
    let b = run_gbp(&rg, &fg, &opts, None).unwrap();
    assert!(a.state.converged && b.state.converged);
    let ma = node_marginals(&rg, &fg, &a.beliefs).unwrap();
    let mb = node_marginals(&rg, &fg, &b.beliefs).unwrap();
    for (x, y) in ma.iter().zip(&mb) {
        assert!(max_abs_diff(x, y) < 1e-7);
    }
}

#[test]
fn warm_start_from_fixed_point_stops_after_one_sweep() {
    let fg = gen_grid(3, 3, 1.0, 0.5, 4).unwrap();
    let rg = RegionGraph::bethe(&fg);
    let engine = GbpEngine::new(&rg, &fg).unwrap();
    let first = engine.run(&GbpOptions::default(), None).unwrap();
    let second = engine.run(&GbpOptions::default(), Some(&first.state)).unwrap();
    assert!(second.state.converged);
    assert_eq!(second.state.iteration, 1);
}

#[test]
fn frozen_edges_keep_their_messages() {
    let fg = gen_grid(2, 2, 1.0, 0.5, 4).unwrap();
    let rg = RegionGraph::bethe(&fg);
    let engine = GbpEngine::new(&rg, &fg).unwrap();
    let mut active = vec![true; engine.edges().len()];
    active[0] = false;
    let run = engine.run_restricted(&GbpOptions::default(), None, Some(&active)).unwrap();
    let size = run.state.messages[0].log_values.len() as f64;
    assert!(run.state.messages[0].log_values.iter().all(|&v| v == -size.ln()));
}

#[test]
fn diagnostics_serialize_one_row_per_sweep() {
    let fg = gen_grid(2, 2, 1.0, 0.5, 4).unwrap();
    let rg = RegionGraph::bethe(&fg);
    let run = run_gbp(&rg, &fg, &GbpOptions::default(), None).unwrap();
    let mut buf = Vec::new();
    run.diagnostics.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), run.state.iteration + 1);
    assert!(text.starts_with("iteration,max_residual,clamp_count"));
}

#[test]
fn bad_options_are_rejected() {
    let fg = two_node(vec![1.0; 4]);
    let rg = RegionGraph::bethe(&fg);
    let opts = GbpOptions {
        damping: 1.0,
        ..GbpOptions::default()
    };
    assert!(run_gbp(&rg, &fg, &opts, None).is_err());
}

#[test]
fn transferred_beliefs_marginalize_from_smallest_cover() {
    let fg = small_model();
    let rg = RegionGraph::bethe(&fg);
    let run = run_gbp(&rg, &fg, &GbpOptions::default(), None).unwrap();
    let copy = transfer_beliefs(&rg, &run.beliefs, &rg, &fg).unwrap();
    assert_eq!(copy, run.beliefs);
}
