use crate::elimination::{min_fill_order, treewidth_exact, Graph, EXACT_TREEWIDTH_MAX_VERTICES};
use crate::factor_graph::{FactorGraph, VarId};
use crate::region_graph::Region;

/// Region width and whether it is exact or a min-fill upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionWidth {
    pub width: usize,
    pub exact: bool,
}

/// Treewidth of the graph on the region's variables in which every factor scope
/// and every child scope is a clique. Exact up to 14 variables, min-fill bound above.
pub fn region_width(candidate: &Region, child_scopes: &[Vec<VarId>], fg: &FactorGraph) -> RegionWidth {
    let local = |v: &VarId| {
        candidate
            .vars
            .binary_search(v)
            .expect("child and factor scopes must lie inside the region")
    };
    let mut g = Graph::new(candidate.vars.len());
    for &f in &candidate.factors {
        let clique: Vec<usize> = fg.factor(f).scope.iter().map(local).collect();
        g.add_clique(&clique);
    }
    for scope in child_scopes {
        let clique: Vec<usize> = scope.iter().map(local).collect();
        g.add_clique(&clique);
    }
    if g.len() <= EXACT_TREEWIDTH_MAX_VERTICES {
        RegionWidth {
            width: treewidth_exact(&g).expect("size checked"),
            exact: true,
        }
    } else {
        RegionWidth {
            width: min_fill_order(&g).1,
            exact: false,
        }
    }
}
