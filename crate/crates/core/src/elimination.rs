//! Elimination orderings and treewidth on small undirected graphs.

use std::collections::BTreeSet;

/// Largest vertex count handled by [`treewidth_exact`].
pub const EXACT_TREEWIDTH_MAX_VERTICES: usize = 14;

/// Undirected graph on vertices `0..n` as sorted neighbor sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<BTreeSet<usize>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            adj: vec![BTreeSet::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a].insert(b);
            self.adj[b].insert(a);
        }
    }

    /// Connects every pair in `vertices`.
    pub fn add_clique(&mut self, vertices: &[usize]) {
        for (k, &a) in vertices.iter().enumerate() {
            for &b in &vertices[k + 1..] {
                self.add_edge(a, b);
            }
        }
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }
}

fn fill_in(adj: &[BTreeSet<usize>], v: usize) -> usize {
    let nb: Vec<usize> = adj[v].iter().copied().collect();
    let mut missing = 0;
    for (k, &a) in nb.iter().enumerate() {
        for &b in &nb[k + 1..] {
            if !adj[a].contains(&b) {
                missing += 1;
            }
        }
    }
    missing
}

fn eliminate_vertex(adj: &mut [BTreeSet<usize>], v: usize) {
    let nb: Vec<usize> = adj[v].iter().copied().collect();
    for (k, &a) in nb.iter().enumerate() {
        adj[a].remove(&v);
        for &b in &nb[k + 1..] {
            adj[a].insert(b);
            adj[b].insert(a);
        }
    }
    if let Some(&last) = nb.last() {
        adj[last].remove(&v);
    }
    adj[v].clear();
}

/// Greedy min-fill ordering of all vertices; ties go to the lowest vertex id.
///
/// Returns the ordering and its induced width.
pub fn min_fill_order(graph: &Graph) -> (Vec<usize>, usize) {
    let mut adj = graph.adj.clone();
    let mut alive: BTreeSet<usize> = (0..graph.len()).collect();
    let mut order = Vec::with_capacity(graph.len());
    let mut width = 0;
    while !alive.is_empty() {
        let v = *alive
            .iter()
            .min_by_key(|&&v| (fill_in(&adj, v), v))
            .expect("alive is nonempty");
        width = width.max(adj[v].len());
        eliminate_vertex(&mut adj, v);
        alive.remove(&v);
        order.push(v);
    }
    (order, width)
}

/// Induced width of eliminating `order` (vertices absent from `order` are never eliminated).
pub fn induced_width(graph: &Graph, order: &[usize]) -> usize {
    let mut adj = graph.adj.clone();
    let mut width = 0;
    for &v in order {
        width = width.max(adj[v].len());
        eliminate_vertex(&mut adj, v);
    }
    width
}

/// Exact treewidth by dynamic programming over eliminated vertex subsets.
///
/// `TW(S) = min_{v in S} max(TW(S \ v), |Q(S \ v, v)|)` where `Q(S, v)` is the set of
/// vertices outside `S + v` reachable from `v` through `S`. Returns `None` above
/// [`EXACT_TREEWIDTH_MAX_VERTICES`].
pub fn treewidth_exact(graph: &Graph) -> Option<usize> {
    let n = graph.len();
    if n > EXACT_TREEWIDTH_MAX_VERTICES {
        return None;
    }
    if n == 0 {
        return Some(0);
    }
    let masks: Vec<u32> = graph
        .adj
        .iter()
        .map(|nb| nb.iter().fold(0u32, |m, &b| m | (1 << b)))
        .collect();
    let q = |set: u32, v: usize| -> u32 {
        // flood from v through vertices of `set`
        let mut reached = 1u32 << v;
        let mut frontier = 1u32 << v;
        let mut boundary = 0u32;
        while frontier != 0 {
            let u = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let nb = masks[u] & !reached;
            reached |= nb;
            boundary |= nb & !set;
            frontier |= nb & set;
        }
        (boundary & !(1 << v)).count_ones()
    };
    let full = (1u32 << n) - 1;
    let mut tw = vec![u32::MAX; 1 << n];
    tw[0] = 0;
    for set in 1..=full {
        let mut best = u32::MAX;
        let mut rest = set;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let without = set & !(1 << v);
            let cand = tw[without as usize].max(q(without, v));
            best = best.min(cand);
        }
        tw[set as usize] = best;
    }
    Some(tw[full as usize] as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Graph {
        let mut g = Graph::new(n);
        for i in 0..n {
            g.add_edge(i, (i + 1) % n);
        }
        g
    }

    fn grid(n: usize) -> Graph {
        let mut g = Graph::new(n * n);
        for r in 0..n {
            for c in 0..n {
                if c + 1 < n {
                    g.add_edge(r * n + c, r * n + c + 1);
                }
                if r + 1 < n {
                    g.add_edge(r * n + c, (r + 1) * n + c);
                }
            }
        }
        g
    }

    #[test]
    fn exact_treewidth_of_simple_families() {
        assert_eq!(treewidth_exact(&Graph::new(1)), Some(0));
        assert_eq!(treewidth_exact(&cycle(3)), Some(2));
        assert_eq!(treewidth_exact(&cycle(8)), Some(2));
        let mut path = Graph::new(5);
        for i in 0..4 {
            path.add_edge(i, i + 1);
        }
        assert_eq!(treewidth_exact(&path), Some(1));
        let mut k5 = Graph::new(5);
        k5.add_clique(&[0, 1, 2, 3, 4]);
        assert_eq!(treewidth_exact(&k5), Some(4));
        assert_eq!(treewidth_exact(&grid(3)), Some(3));
        assert_eq!(treewidth_exact(&Graph::new(15)), None);
    }

    #[test]
    fn min_fill_on_grid_is_near_optimal() {
        let (order, w) = min_fill_order(&grid(4));
        assert_eq!(order.len(), 16);
        assert!(w <= 4, "min-fill width {w}");
        assert_eq!(induced_width(&grid(4), &order), w);
        let (_, w8) = min_fill_order(&grid(8));
        assert!(w8 <= 10);
    }

    #[test]
    fn min_fill_tie_breaks_on_lowest_id() {
        let (order, w) = min_fill_order(&cycle(4));
        assert_eq!(order[0], 0);
        assert_eq!(w, 2);
    }
}
