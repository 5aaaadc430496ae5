//! Pendant-tree stripping and decomposition of candidate regions into
//! biconnected, pendant-free pieces.
//!
//! A piece that is biconnected in the interaction graph and has no vertex of
//! degree one cannot be split by a separator already present among its children,
//! so it is treated as weakly irreducible. Connected components are split with an
//! empty separator and blocks are split at cut vertices, whose single-variable
//! regions play the role of the shared child.

use std::collections::BTreeSet;

use crate::factor_graph::{FactorGraph, VarId};
use crate::region_graph::{is_sorted_subset, Region};

/// Local interaction graph of a region: vertex `k` is `region.vars[k]`.
fn local_adjacency(region: &Region, fg: &FactorGraph) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); region.vars.len()];
    for &f in &region.factors {
        let local: Vec<usize> = fg.factor(f)
            .scope
            .iter()
            .map(|v| region.vars.binary_search(v).expect("factor scope inside region"))
            .collect();
        for &a in &local {
            for &b in &local {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
    }
    adj
}

fn restrict(region: &Region, fg: &FactorGraph, vars: Vec<VarId>) -> Option<Region> {
    let factors = region
        .factors
        .iter()
        .copied()
        .filter(|&f| is_sorted_subset(&fg.factor(f).scope, &vars))
        .collect();
    Region::new(vars, factors).ok()
}

/// Removes variables of interaction degree at most one (and the factors touching
/// them) until none remain. `None` means the region was entirely tree-like.
pub fn strip_pendant_trees(candidate: &Region, fg: &FactorGraph) -> Option<Region> {
    let mut adj = local_adjacency(candidate, fg);
    let mut alive = vec![true; adj.len()];
    let mut stack: Vec<usize> = (0..adj.len()).filter(|&k| adj[k].len() <= 1).collect();
    while let Some(k) = stack.pop() {
        if !alive[k] {
            continue;
        }
        alive[k] = false;
        let nbs: Vec<usize> = adj[k].iter().copied().collect();
        for nb in nbs {
            adj[nb].remove(&k);
            if alive[nb] && adj[nb].len() <= 1 {
                stack.push(nb);
            }
        }
        adj[k].clear();
    }
    let vars: Vec<VarId> = candidate
        .vars
        .iter()
        .zip(&alive)
        .filter(|(_, a)| **a)
        .map(|(v, _)| *v)
        .collect();
    if vars.is_empty() {
        return None;
    }
    restrict(candidate, fg, vars)
}

/// Connected components of a region's interaction graph, as regions.
pub fn interaction_components(candidate: &Region, fg: &FactorGraph) -> Vec<Region> {
    let adj = local_adjacency(candidate, fg);
    let mut comp = vec![usize::MAX; adj.len()];
    let mut out = Vec::new();
    for start in 0..adj.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut k = 0;
        while k < members.len() {
            let v = members[k];
            k += 1;
            for &w in &adj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    members.push(w);
                }
            }
        }
        let vars = members.iter().map(|&m| candidate.vars[m]).collect();
        out.push(restrict(candidate, fg, vars).expect("component is nonempty"));
    }
    out
}

/// Vertex sets of the biconnected components (Hopcroft-Tarjan, iterative).
fn biconnected_blocks(adj: &[BTreeSet<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut time = 0;
    let mut edge_stack: Vec<(usize, usize)> = Vec::new();
    let mut blocks = Vec::new();
    let neighbors: Vec<Vec<usize>> = adj.iter().map(|s| s.iter().copied().collect()).collect();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        // (vertex, parent, next neighbor index)
        let mut stack = vec![(root, usize::MAX, 0usize)];
        while let Some(&mut (v, parent, ref mut next)) = stack.last_mut() {
            if *next < neighbors[v].len() {
                let w = neighbors[v][*next];
                *next += 1;
                if disc[w] == usize::MAX {
                    edge_stack.push((v, w));
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, v, 0));
                } else if w != parent && disc[w] < disc[v] {
                    edge_stack.push((v, w));
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(u, _, _)) = stack.last() {
                    low[u] = low[u].min(low[v]);
                    if low[v] >= disc[u] {
                        let mut block = BTreeSet::new();
                        while let Some((a, b)) = edge_stack.pop() {
                            block.insert(a);
                            block.insert(b);
                            if (a, b) == (u, v) {
                                break;
                            }
                        }
                        blocks.push(block.into_iter().collect());
                    }
                }
            }
        }
    }
    blocks
}

/// Strips pendant trees, splits into connected components, then into biconnected
/// blocks. Blocks with fewer than three variables (bridges) are tree-like and
/// dropped. Output is sorted and duplicate-free.
pub fn decompose_weakly_irreducible(candidate: &Region, fg: &FactorGraph) -> Vec<Region> {
    let Some(core) = strip_pendant_trees(candidate, fg) else {
        return Vec::new();
    };
    let adj = local_adjacency(&core, fg);
    let mut out: Vec<Region> = biconnected_blocks(&adj)
        .into_iter()
        .filter(|b| b.len() >= 3)
        .filter_map(|b| {
            let vars = b.iter().map(|&k| core.vars[k]).collect();
            restrict(&core, fg, vars).and_then(|r| strip_pendant_trees(&r, fg))
        })
        .collect();
    out.sort();
    out.dedup();
    out
}
