//! Exact inference used as ground truth: full enumeration and variable elimination.

use serde::{Deserialize, Serialize};

use crate::elimination::{induced_width, min_fill_order, Graph};
use crate::error::{Error, Result};
use crate::factor_graph::FactorGraph;
use crate::table::{decode, log_normalize, log_sum_exp, LogTable};

/// Largest joint state space enumerated by [`exact_brute_force`].
pub const BRUTE_FORCE_MAX_STATES: usize = 1 << 22;
/// Largest induced width accepted by [`exact_variable_elimination`].
pub const ELIMINATION_WIDTH_CAP: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactMethod {
    BruteForce,
    VariableElimination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub node_marginals: Vec<Vec<f64>>,
    pub log_partition: f64,
    pub method: ExactMethod,
}

/// Log-probabilities of every joint state, in row-major order over variables `0..n`.
fn enumerate_log_joint(fg: &FactorGraph) -> Result<Vec<f64>> {
    let size = fg.state_space_size();
    if size > BRUTE_FORCE_MAX_STATES as f64 {
        return Err(Error::StateSpaceTooLarge(size));
    }
    let size = size as usize;
    let cards = fg.cardinalities();
    let mut states = vec![0usize; cards.len()];
    let mut out = Vec::with_capacity(size);
    for index in 0..size {
        decode(index, cards, &mut states);
        let mut total = 0.0;
        for f in fg.factors() {
            let mut idx = 0;
            for &v in &f.scope {
                idx = idx * cards[v] + states[v];
            }
            total += f.log_table[idx];
        }
        out.push(total);
    }
    Ok(out)
}

/// Marginals and `log Z` by enumerating every joint state.
pub fn exact_brute_force(fg: &FactorGraph) -> Result<ExactResult> {
    let log_joint = enumerate_log_joint(fg)?;
    let log_partition = log_sum_exp(&log_joint);
    let cards = fg.cardinalities();
    let mut marginals: Vec<Vec<f64>> = cards.iter().map(|&c| vec![0.0; c]).collect();
    let mut states = vec![0usize; cards.len()];
    for (index, lp) in log_joint.iter().enumerate() {
        let p = (lp - log_partition).exp();
        if p == 0.0 {
            continue;
        }
        decode(index, cards, &mut states);
        for (v, &s) in states.iter().enumerate() {
            marginals[v][s] += p;
        }
    }
    for m in &mut marginals {
        let z: f64 = m.iter().sum();
        m.iter_mut().for_each(|p| *p /= z);
    }
    Ok(ExactResult {
        node_marginals: marginals,
        log_partition,
        method: ExactMethod::BruteForce,
    })
}

/// Entropy `-sum p log p` of the normalized joint, by enumeration.
pub fn exact_entropy_brute_force(fg: &FactorGraph) -> Result<f64> {
    let log_joint = enumerate_log_joint(fg)?;
    let log_partition = log_sum_exp(&log_joint);
    Ok(log_joint
        .iter()
        .map(|lp| {
            let lp = lp - log_partition;
            if lp == f64::NEG_INFINITY {
                0.0
            } else {
                -lp.exp() * lp
            }
        })
        .sum())
}

pub fn interaction_graph(fg: &FactorGraph) -> Graph {
    let mut g = Graph::new(fg.num_vars());
    for f in fg.factors() {
        g.add_clique(&f.scope);
    }
    g
}

fn eliminate(mut tables: Vec<LogTable>, order: &[usize]) -> Vec<LogTable> {
    for &v in order {
        let (touching, rest): (Vec<LogTable>, Vec<LogTable>) =
            tables.into_iter().partition(|t| t.vars.binary_search(&v).is_ok());
        tables = rest;
        if let Some(combined) = touching.into_iter().reduce(|a, b| a.product(&b)) {
            tables.push(combined.sum_out(v));
        }
    }
    tables
}

/// Marginals and `log Z` by variable elimination.
///
/// `order` defaults to min-fill (ties to lowest id). An explicit order must be a
/// permutation of all variables; an empty slice means natural id order. Each
/// marginal is one elimination run with the queried variable skipped.
pub fn exact_variable_elimination(fg: &FactorGraph, order: Option<&[usize]>) -> Result<ExactResult> {
    let graph = interaction_graph(fg);
    let n = fg.num_vars();
    let order: Vec<usize> = match order {
        None => min_fill_order(&graph).0,
        Some([]) => (0..n).collect(),
        Some(o) => {
            let mut seen = vec![false; n];
            for &v in o {
                if v >= n || seen[v] {
                    return Err(Error::InvalidParameter(format!(
                        "elimination order must be a permutation of 0..{n}"
                    )));
                }
                seen[v] = true;
            }
            if o.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "elimination order must be a permutation of 0..{n}"
                )));
            }
            o.to_vec()
        }
    };
    let width = induced_width(&graph, &order);
    if width > ELIMINATION_WIDTH_CAP {
        return Err(Error::WidthExceeded {
            width,
            cap: ELIMINATION_WIDTH_CAP,
        });
    }
    let base: Vec<LogTable> = fg
        .factors()
        .iter()
        .map(|f| LogTable {
            vars: f.scope.clone(),
            cards: f.scope.iter().map(|&v| fg.card(v)).collect(),
            values: f.log_table.clone(),
        })
        .collect();

    let log_partition = eliminate(base.clone(), &order)
        .iter()
        .map(|t| t.values[0])
        .sum::<f64>();

    let mut marginals = Vec::with_capacity(n);
    for query in 0..n {
        let partial: Vec<usize> = order.iter().copied().filter(|&v| v != query).collect();
        let rest = eliminate(base.clone(), &partial);
        let mut acc = vec![0.0; fg.card(query)];
        for t in rest {
            if t.vars.is_empty() {
                continue;
            }
            debug_assert_eq!(t.vars, vec![query]);
            for (a, v) in acc.iter_mut().zip(&t.values) {
                *a += v;
            }
        }
        log_normalize(&mut acc);
        marginals.push(acc.iter().map(|v| v.exp()).collect());
    }
    Ok(ExactResult {
        node_marginals: marginals,
        log_partition,
        method: ExactMethod::VariableElimination,
    })
}

/// Brute force when the state space allows it, variable elimination otherwise.
pub fn exact_inference(fg: &FactorGraph) -> Result<ExactResult> {
    if fg.state_space_size() <= (1u64 << 16) as f64 {
        exact_brute_force(fg)
    } else {
        exact_variable_elimination(fg, None)
    }
}

/// `(1/|V|) sum_i sum_x |b_i(x) - p_i(x)|`.
pub fn avg_l1_error(approx: &[Vec<f64>], exact: &ExactResult) -> Result<f64> {
    if approx.len() != exact.node_marginals.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} approximate marginals vs {} exact",
            approx.len(),
            exact.node_marginals.len()
        )));
    }
    if approx.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (i, (b, p)) in approx.iter().zip(&exact.node_marginals).enumerate() {
        if b.len() != p.len() {
            return Err(Error::DimensionMismatch(format!(
                "variable {i}: {} vs {} states",
                b.len(),
                p.len()
            )));
        }
        total += b.iter().zip(p).map(|(x, y)| (x - y).abs()).sum::<f64>();
    }
    Ok(total / approx.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor_graph::{gen_fully_connected, gen_grid, gen_tree};

    #[test]
    fn uniform_model() {
        let fg = FactorGraph::new(
            vec![2, 2, 2],
            vec![(vec![0, 1], vec![1.0; 4]), (vec![1, 2], vec![1.0; 4])],
        )
        .unwrap();
        let r = exact_brute_force(&fg).unwrap();
        assert!((r.log_partition - 3.0 * 2f64.ln()).abs() < 1e-14);
        for m in &r.node_marginals {
            assert!((m[0] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn single_unary() {
        let fg = FactorGraph::new(vec![2], vec![(vec![0], vec![1.0, 3.0])]).unwrap();
        let r = exact_brute_force(&fg).unwrap();
        assert!((r.node_marginals[0][0] - 0.25).abs() < 1e-15);
        assert!((r.log_partition - 4f64.ln()).abs() < 1e-15);
        assert!((exact_entropy_brute_force(&fg).unwrap()
            - -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln()))
        .abs()
            < 1e-14);
    }

    #[test]
    fn brute_force_and_elimination_agree_on_fc4() {
        let fg = gen_fully_connected(4, 1.0, 0.5, 7).unwrap();
        let a = exact_brute_force(&fg).unwrap();
        let b = exact_variable_elimination(&fg, None).unwrap();
        assert!((a.log_partition - b.log_partition).abs() < 1e-10);
        assert!(avg_l1_error(&a.node_marginals, &b).unwrap() < 1e-10);
    }

    #[test]
    fn chain_has_width_one() {
        let fg = FactorGraph::new(
            vec![2; 5],
            (0..4)
                .map(|i| (vec![i, i + 1], vec![1.0 + i as f64, 2.0, 0.5, 3.0]))
                .collect(),
        )
        .unwrap();
        let (_, w) = min_fill_order(&interaction_graph(&fg));
        assert_eq!(w, 1);
        let a = exact_brute_force(&fg).unwrap();
        let b = exact_variable_elimination(&fg, None).unwrap();
        for (x, y) in a.node_marginals.iter().zip(&b.node_marginals) {
            assert!((x[0] - y[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_4x4_width_and_runtime() {
        let fg = gen_grid(4, 4, 1.0, 0.5, 1).unwrap();
        let (_, w) = min_fill_order(&interaction_graph(&fg));
        assert!(w <= 4);
        let start = std::time::Instant::now();
        let b = exact_variable_elimination(&fg, None).unwrap();
        assert!(start.elapsed().as_secs_f64() < 1.0);
        let a = exact_brute_force(&fg).unwrap();
        assert!((a.log_partition - b.log_partition).abs() < 1e-10);
    }

    #[test]
    fn empty_order_on_tree_matches_brute_force() {
        let fg = gen_tree(8, 1.0, 1.0, 3).unwrap();
        let a = exact_brute_force(&fg).unwrap();
        let b = exact_variable_elimination(&fg, Some(&[])).unwrap();
        assert!((a.log_partition - b.log_partition).abs() < 1e-12);
        assert!(avg_l1_error(&a.node_marginals, &b).unwrap() < 1e-12);
    }

    #[test]
    fn bad_orders_are_rejected() {
        let fg = gen_tree(4, 1.0, 1.0, 3).unwrap();
        assert!(exact_variable_elimination(&fg, Some(&[0, 1])).is_err());
        assert!(exact_variable_elimination(&fg, Some(&[0, 1, 1, 2])).is_err());
    }

    #[test]
    fn l1_error_arithmetic() {
        let exact = ExactResult {
            node_marginals: vec![vec![0.0, 1.0], vec![0.3, 0.7]],
            log_partition: 0.0,
            method: ExactMethod::BruteForce,
        };
        assert_eq!(avg_l1_error(&exact.node_marginals, &exact).unwrap(), 0.0);
        let approx = vec![vec![1.0, 0.0], vec![0.3, 0.7]];
        assert!((avg_l1_error(&approx, &exact).unwrap() - 1.0).abs() < 1e-15);
        assert!(avg_l1_error(&approx[..1], &exact).is_err());
        assert!(avg_l1_error(&[vec![1.0], vec![0.3, 0.7]], &exact).is_err());
    }

    #[test]
    fn state_space_cap() {
        let fg = gen_grid(5, 5, 1.0, 0.5, 1).unwrap();
        assert!(matches!(exact_brute_force(&fg), Err(Error::StateSpaceTooLarge(_))));
    }
}
