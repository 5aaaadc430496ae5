use crate::factor_graph::{FactorGraph, VarId};

/// All chordless cycles of length `3..=max_len` in the interaction graph.
///
/// Each cycle starts at its smallest variable, followed by the smaller of that
/// variable's two cycle neighbours. Output is sorted by length, then lexicographically.
pub fn enumerate_chordless_cycles(fg: &FactorGraph, max_len: usize) -> Vec<Vec<VarId>> {
    let adj = fg.interaction_adjacency();
    let n = adj.len();
    let mut is_adj = vec![vec![false; n]; n];
    for (v, ns) in adj.iter().enumerate() {
        for &w in ns {
            is_adj[v][w] = true;
        }
    }
    let mut out = Vec::new();
    if max_len < 3 {
        return out;
    }
    for s in 0..n {
        for &v1 in adj[s].iter().filter(|&&v| v > s) {
            let mut path = vec![s, v1];
            extend(&adj, &is_adj, max_len, &mut path, &mut out);
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn extend(adj: &[Vec<VarId>], is_adj: &[Vec<bool>], max_len: usize, path: &mut Vec<VarId>, out: &mut Vec<Vec<VarId>>) {
    let s = path[0];
    let last = *path.last().expect("path is nonempty");
    for &w in &adj[last] {
        if w <= s || path.contains(&w) {
            continue;
        }
        // w may only touch the last vertex and, when it closes the cycle, the start
        if path[1..path.len() - 1].iter().any(|&p| is_adj[w][p]) {
            continue;
        }
        if is_adj[w][s] {
            if w > path[1] {
                let mut cycle = path.clone();
                cycle.push(w);
                out.push(cycle);
            }
        } else if path.len() + 1 < max_len {
            path.push(w);
            extend(adj, is_adj, max_len, path, out);
            path.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor_graph::{gen_fully_connected, gen_grid, gen_tree};

    #[test]
    fn square_grid_has_one_four_cycle() {
        let fg = gen_grid(2, 2, 1.0, 0.5, 0).unwrap();
        assert_eq!(enumerate_chordless_cycles(&fg, 8), vec![vec![0, 1, 3, 2]]);
    }

    #[test]
    fn complete_graph_has_only_triangles() {
        let fg = gen_fully_connected(4, 1.0, 0.5, 0).unwrap();
        let cycles = enumerate_chordless_cycles(&fg, 4);
        assert_eq!(cycles.len(), 4);
        assert!(cycles.iter().all(|c| c.len() == 3));
    }

    #[test]
    fn tree_has_no_cycles() {
        let fg = gen_tree(10, 1.0, 0.5, 2).unwrap();
        assert!(enumerate_chordless_cycles(&fg, 10).is_empty());
    }

    #[test]
    fn grid_cycles_respect_length_limit() {
        let fg = gen_grid(3, 3, 1.0, 0.5, 0).unwrap();
        assert_eq!(enumerate_chordless_cycles(&fg, 4).len(), 4);
        // every 6-cycle around two squares has the shared edge as a chord; the rim is chordless
        let all = enumerate_chordless_cycles(&fg, 9);
        assert_eq!(all.iter().filter(|c| c.len() == 6).count(), 0);
        assert_eq!(all.iter().filter(|c| c.len() == 8).count(), 1);
    }

    #[test]
    fn matches_brute_force_on_small_graphs() {
        for seed in 0..4 {
            let fg = gen_fully_connected(5, 1.0, 0.0, seed).unwrap();
            // drop some edges to get a sparser graph
            let keep: Vec<_> = fg
                .factors()
                .iter()
                .filter(|f| f.scope.len() == 2 && (f.scope[0] * 7 + f.scope[1] * 3 + seed as usize) % 4 != 0)
                .map(|f| (f.scope.clone(), f.table()))
                .chain((0..5).map(|v| (vec![v], vec![1.0, 1.0])))
                .collect();
            let sparse = FactorGraph::new(vec![2; 5], keep).unwrap();
            let got = enumerate_chordless_cycles(&sparse, 5);
            assert_eq!(got, brute_force(&sparse, 5));
        }
    }

    fn brute_force(fg: &FactorGraph, max_len: usize) -> Vec<Vec<VarId>> {
        let adj = fg.interaction_adjacency();
        let n = adj.len();
        let e = |a: usize, b: usize| adj[a].contains(&b);
        let mut out = Vec::new();
        fn perms(rest: &mut Vec<usize>, cur: &mut Vec<usize>, all: &mut Vec<Vec<usize>>) {
            if rest.is_empty() {
                all.push(cur.clone());
                return;
            }
            for i in 0..rest.len() {
                let x = rest.remove(i);
                cur.push(x);
                perms(rest, cur, all);
                cur.pop();
                rest.insert(i, x);
            }
        }
        for mask in 0u32..(1 << n) {
            let vs: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
            let k = vs.len();
            if k < 3 || k > max_len {
                continue;
            }
            let edges = vs.iter().flat_map(|&a| vs.iter().map(move |&b| (a, b))).filter(|&(a, b)| a < b && e(a, b)).count();
            if edges != k {
                continue;
            }
            let mut all = Vec::new();
            perms(&mut vs[1..].to_vec(), &mut vec![vs[0]], &mut all);
            if let Some(c) = all
                .into_iter()
                .filter(|c| (0..k).all(|i| e(c[i], c[(i + 1) % k])) && c[1] < c[k - 1])
                .min()
            {
                out.push(c);
            }
        }
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }
}
