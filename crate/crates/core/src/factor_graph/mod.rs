//! Discrete factor-graph models.
//!
//! A [`FactorGraph`] is a set of variables with finite cardinalities and a list of
//! nonnegative factor tables. The joint distribution is the normalized product of
//! the tables. Tables are kept in the log domain internally; the linear domain is
//! only used at the construction and file boundaries.

mod generators;
mod uai;

pub use generators::{
    gen_fully_connected, gen_grid, gen_loop, gen_tree, generate, GeneratorMeta, ModelFamily,
    WeightParams, GENERATOR_VERSION,
};
pub use uai::{read_uai, write_uai};

use crate::error::{Error, Result};
use crate::table::{decode, strides, table_size};

pub type VarId = usize;
pub type FactorId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub id: FactorId,
    /// Sorted, duplicate-free variable ids.
    pub scope: Vec<VarId>,
    /// Natural-log entries, row-major over `scope` with the last variable fastest.
    pub log_table: Vec<f64>,
}

impl Factor {
    /// Linear-domain table.
    pub fn table(&self) -> Vec<f64> {
        self.log_table.iter().map(|v| v.exp()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorGraph {
    cards: Vec<usize>,
    factors: Vec<Factor>,
}

/// One state index per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment(pub Vec<usize>);

impl FactorGraph {
    /// Validates and builds a model from linear-domain tables.
    ///
    /// Scopes may be given in any order; they are sorted and the table entries are
    /// permuted accordingly. Factor ids follow input order.
    pub fn new(cardinalities: Vec<usize>, factors: Vec<(Vec<VarId>, Vec<f64>)>) -> Result<Self> {
        for (var, &card) in cardinalities.iter().enumerate() {
            if card < 2 {
                return Err(Error::BadCardinality { var, card });
            }
        }
        let mut built = Vec::with_capacity(factors.len());
        for (id, (scope, table)) in factors.into_iter().enumerate() {
            if scope.is_empty() {
                return Err(Error::EmptyScope(id));
            }
            let mut seen = std::collections::BTreeSet::new();
            for &v in &scope {
                if v >= cardinalities.len() || !seen.insert(v) {
                    return Err(Error::BadScope { factor: id, var: v });
                }
            }
            let cards: Vec<usize> = scope.iter().map(|&v| cardinalities[v]).collect();
            let expected = table_size(&cards).ok_or(Error::SizeMismatch {
                factor: id,
                expected: usize::MAX,
                actual: table.len(),
            })?;
            if expected != table.len() {
                return Err(Error::SizeMismatch {
                    factor: id,
                    expected,
                    actual: table.len(),
                });
            }
            if let Some(&value) = table.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::InvalidEntry { factor: id, value });
            }
            if !table.iter().any(|&v| v > 0.0) {
                return Err(Error::AllZeroTable(id));
            }
            let log: Vec<f64> = table.iter().map(|v| v.ln()).collect();
            built.push(canonical_factor(id, scope, &cards, log));
        }
        Self::from_log_factors(cardinalities, built)
    }

    /// Builds from factors whose scopes are already sorted and whose tables are in the log domain.
    pub(crate) fn from_log_factors(cards: Vec<usize>, factors: Vec<Factor>) -> Result<Self> {
        let mut mentioned = vec![false; cards.len()];
        for f in &factors {
            for &v in &f.scope {
                mentioned[v] = true;
            }
        }
        if let Some(var) = mentioned.iter().position(|m| !m) {
            return Err(Error::IsolatedVariable(var));
        }
        Ok(FactorGraph { cards, factors })
    }

    pub fn num_vars(&self) -> usize {
        self.cards.len()
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cards
    }

    pub fn card(&self, var: VarId) -> usize {
        self.cards[var]
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor(&self, id: FactorId) -> &Factor {
        &self.factors[id]
    }

    /// Product of all factor entries at `x`, accumulated in the log domain.
    pub fn unnormalized_joint(&self, x: &Assignment) -> Result<f64> {
        self.log_unnormalized_joint(x).map(f64::exp)
    }

    pub fn log_unnormalized_joint(&self, x: &Assignment) -> Result<f64> {
        self.check_assignment(x)?;
        Ok(self
            .factors
            .iter()
            .map(|f| {
                let mut idx = 0;
                for &v in &f.scope {
                    idx = idx * self.cards[v] + x.0[v];
                }
                f.log_table[idx]
            })
            .sum())
    }

    pub fn check_assignment(&self, x: &Assignment) -> Result<()> {
        if x.0.len() != self.cards.len() {
            return Err(Error::InvalidAssignment(format!(
                "length {} but model has {} variables",
                x.0.len(),
                self.cards.len()
            )));
        }
        if let Some((var, &s)) = x.0.iter().enumerate().find(|(v, s)| **s >= self.cards[*v]) {
            return Err(Error::InvalidAssignment(format!(
                "state {s} out of range for variable {var}"
            )));
        }
        Ok(())
    }

    /// Undirected adjacency of the interaction graph: variables sharing a factor are neighbors.
    pub fn interaction_adjacency(&self) -> Vec<Vec<VarId>> {
        let mut adj: Vec<std::collections::BTreeSet<VarId>> = vec![Default::default(); self.num_vars()];
        for f in &self.factors {
            for (k, &a) in f.scope.iter().enumerate() {
                for &b in &f.scope[k + 1..] {
                    adj[a].insert(b);
                    adj[b].insert(a);
                }
            }
        }
        adj.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    /// Ids of the factors whose scope is contained in the sorted variable set `vars`.
    pub fn factors_within(&self, vars: &[VarId]) -> Vec<FactorId> {
        self.factors
            .iter()
            .filter(|f| f.scope.iter().all(|v| vars.binary_search(v).is_ok()))
            .map(|f| f.id)
            .collect()
    }

    /// Total number of joint states as a float (may exceed `usize`).
    pub fn state_space_size(&self) -> f64 {
        self.cards.iter().map(|&c| c as f64).product()
    }
}

/// Sorts the scope and permutes the log table to match.
fn canonical_factor(id: FactorId, scope: Vec<VarId>, cards: &[usize], log: Vec<f64>) -> Factor {
    if scope.windows(2).all(|w| w[0] < w[1]) {
        return Factor {
            id,
            scope,
            log_table: log,
        };
    }
    let mut order: Vec<usize> = (0..scope.len()).collect();
    order.sort_by_key(|&k| scope[k]);
    let sorted: Vec<VarId> = order.iter().map(|&k| scope[k]).collect();
    let sorted_cards: Vec<usize> = order.iter().map(|&k| cards[k]).collect();
    let in_strides = strides(cards);
    let mut states = vec![0; scope.len()];
    let mut out = vec![0.0; log.len()];
    for (sorted_idx, slot) in out.iter_mut().enumerate() {
        decode(sorted_idx, &sorted_cards, &mut states);
        let input_idx: usize = order
            .iter()
            .zip(&states)
            .map(|(&k, &s)| s * in_strides[k])
            .sum();
        *slot = log[input_idx];
    }
    Factor {
        id,
        scope: sorted,
        log_table: out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_2x2_factors() -> Vec<(Vec<usize>, Vec<f64>)> {
        let mut fs: Vec<(Vec<usize>, Vec<f64>)> = (0..4).map(|i| (vec![i], vec![1.0, 2.0])).collect();
        for (a, b) in [(0, 1), (2, 3), (0, 2), (1, 3)] {
            fs.push((vec![a, b], vec![2.0, 1.0, 1.0, 2.0]));
        }
        fs
    }

    #[test]
    fn single_unary_factor_is_valid() {
        let fg = FactorGraph::new(vec![2], vec![(vec![0], vec![1.0, 1.0])]).unwrap();
        assert_eq!(fg.num_vars(), 1);
        assert_eq!(fg.card(0), 2);
    }

    #[test]
    fn pairwise_table_of_wrong_length_is_rejected() {
        let err = FactorGraph::new(vec![2, 2], vec![(vec![0, 1], vec![1.0, 1.0, 1.0])]).unwrap_err();
        assert!(matches!(err, Error::SizeMismatch { expected: 4, actual: 3, .. }));
        assert!(err.to_string().contains("size mismatch"));
    }

    #[test]
    fn grid_factor_list_builds() {
        let fg = FactorGraph::new(vec![2; 4], grid_2x2_factors()).unwrap();
        assert_eq!(fg.num_factors(), 8);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            FactorGraph::new(vec![2], vec![(vec![], vec![1.0])]),
            Err(Error::EmptyScope(0))
        ));
        assert!(matches!(
            FactorGraph::new(vec![2], vec![(vec![0], vec![-1.0, 1.0])]),
            Err(Error::InvalidEntry { .. })
        ));
        assert!(matches!(
            FactorGraph::new(vec![2], vec![(vec![0], vec![f64::NAN, 1.0])]),
            Err(Error::InvalidEntry { .. })
        ));
        assert!(matches!(
            FactorGraph::new(vec![2, 2], vec![(vec![0], vec![1.0, 1.0])]),
            Err(Error::IsolatedVariable(1))
        ));
        assert!(matches!(
            FactorGraph::new(vec![2], vec![(vec![0], vec![0.0, 0.0])]),
            Err(Error::AllZeroTable(0))
        ));
        assert!(matches!(
            FactorGraph::new(vec![2, 2], vec![(vec![0, 0], vec![1.0; 4])]),
            Err(Error::BadScope { .. })
        ));
    }

    #[test]
    fn joint_is_table_lookup() {
        let fg = FactorGraph::new(vec![2], vec![(vec![0], vec![2.0, 3.0])]).unwrap();
        let v = fg.unnormalized_joint(&Assignment(vec![1])).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
        assert!(fg.unnormalized_joint(&Assignment(vec![2])).is_err());
        assert!(fg.unnormalized_joint(&Assignment(vec![0, 0])).is_err());
    }

    #[test]
    fn uniform_tables_give_unit_joint() {
        let fg = FactorGraph::new(
            vec![2, 3],
            vec![(vec![0, 1], vec![1.0; 6]), (vec![1], vec![1.0; 3])],
        )
        .unwrap();
        for a in 0..2 {
            for b in 0..3 {
                assert_eq!(fg.unnormalized_joint(&Assignment(vec![a, b])).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn chain_joint_matches_hand_product() {
        let t01 = vec![1.0, 2.0, 3.0, 4.0];
        let t12 = vec![0.5, 1.5, 2.5, 3.5, 4.5, 5.5];
        let fg = FactorGraph::new(
            vec![2, 2, 3],
            vec![(vec![0, 1], t01.clone()), (vec![1, 2], t12.clone())],
        )
        .unwrap();
        for x0 in 0..2 {
            for x1 in 0..2 {
                for x2 in 0..3 {
                    let expected = t01[x0 * 2 + x1] * t12[x1 * 3 + x2];
                    let got = fg.unnormalized_joint(&Assignment(vec![x0, x1, x2])).unwrap();
                    assert!((got - expected).abs() < 1e-12 * expected);
                }
            }
        }
    }

    #[test]
    fn unsorted_scope_is_canonicalized() {
        // scope given as (1, 0): entry for (x1, x0) = t[x1 * 3 + x0]
        let t = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let fg = FactorGraph::new(vec![3, 2], vec![(vec![1, 0], t.clone())]).unwrap();
        assert_eq!(fg.factor(0).scope, vec![0, 1]);
        for x0 in 0..3 {
            for x1 in 0..2 {
                let got = fg.unnormalized_joint(&Assignment(vec![x0, x1])).unwrap();
                assert!((got - t[x1 * 3 + x0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn joint_is_multiplicative_over_disjoint_union() {
        let left = vec![(vec![0, 1], vec![1.0, 2.0, 3.0, 4.0])];
        let right = vec![(vec![0], vec![5.0, 7.0])];
        let a = FactorGraph::new(vec![2, 2], left.clone()).unwrap();
        let b = FactorGraph::new(vec![2], right).unwrap();
        let union = FactorGraph::new(
            vec![2, 2, 2],
            vec![left[0].clone(), (vec![2], vec![5.0, 7.0])],
        )
        .unwrap();
        for x in 0..8usize {
            let s = vec![x >> 2 & 1, x >> 1 & 1, x & 1];
            let ja = a.unnormalized_joint(&Assignment(vec![s[0], s[1]])).unwrap();
            let jb = b.unnormalized_joint(&Assignment(vec![s[2]])).unwrap();
            let ju = union.unnormalized_joint(&Assignment(s)).unwrap();
            assert!((ju - ja * jb).abs() < 1e-12 * ju);
        }
    }
}
