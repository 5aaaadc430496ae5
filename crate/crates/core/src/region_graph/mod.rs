//! Region graphs: regions, parent-to-child edges, counting numbers and validity.
//!
//! A region is a set of variables together with a subset of the factors whose
//! scopes fit inside it. Edges run from a region to one of its subregions. Each
//! region carries the integer counting number `c_r = 1 - sum_{a in Anc(r)} c_a`.
//! A region graph is valid for a model when, for every variable and every factor,
//! the regions containing it form a weakly connected subgraph (C1) whose counting
//! numbers sum to one (C2).

mod text;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::factor_graph::{FactorGraph, FactorId, VarId};

pub type RegionId = usize;

/// A sorted variable set and a sorted factor set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    pub vars: Vec<VarId>,
    pub factors: Vec<FactorId>,
}

impl Region {
    /// Sorts and dedups both sets; the variable set must be nonempty.
    pub fn new(mut vars: Vec<VarId>, mut factors: Vec<FactorId>) -> Result<Self> {
        vars.sort_unstable();
        vars.dedup();
        factors.sort_unstable();
        factors.dedup();
        if vars.is_empty() {
            return Err(Error::InvalidRegion("region has no variables".into()));
        }
        Ok(Region { vars, factors })
    }

    /// The region over `vars` holding every factor whose scope fits inside.
    pub fn with_all_factors(fg: &FactorGraph, vars: Vec<VarId>) -> Result<Self> {
        let mut r = Region::new(vars, Vec::new())?;
        r.factors = fg.factors_within(&r.vars);
        Ok(r)
    }

    pub fn contains_var(&self, v: VarId) -> bool {
        self.vars.binary_search(&v).is_ok()
    }

    pub fn contains_factor(&self, a: FactorId) -> bool {
        self.factors.binary_search(&a).is_ok()
    }

    /// `self` contains all variables and factors of `other`.
    pub fn contains(&self, other: &Region) -> bool {
        is_sorted_subset(&other.vars, &self.vars) && is_sorted_subset(&other.factors, &self.factors)
    }

    /// Checks factor ids against the model and factor scopes against the variable set.
    pub fn validate(&self, fg: &FactorGraph) -> Result<()> {
        if let Some(&v) = self.vars.iter().find(|&&v| v >= fg.num_vars()) {
            return Err(Error::InvalidRegion(format!("unknown variable {v}")));
        }
        for &a in &self.factors {
            if a >= fg.num_factors() {
                return Err(Error::InvalidRegion(format!("unknown factor {a}")));
            }
            if !is_sorted_subset(&fg.factor(a).scope, &self.vars) {
                return Err(Error::InvalidRegion(format!(
                    "factor {a} scope {:?} is not inside variables {:?}",
                    fg.factor(a).scope,
                    self.vars
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{vars {:?} factors {:?}}}", self.vars, self.factors)
    }
}

pub(crate) fn is_sorted_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    small.iter().all(|s| it.any(|b| b == s))
}

/// A variable or a factor, the two kinds of items C1/C2 are checked for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Item {
    Var(VarId),
    Factor(FactorId),
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Var(v) => write!(f, "variable {v}"),
            Item::Factor(a) => write!(f, "factor {a}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// C1: the regions containing the item are not weakly connected.
    Disconnected(Item),
    /// C2: counting numbers of the regions containing the item do not sum to one.
    CountingSum { item: Item, sum: i64 },
    /// Two regions with identical contents.
    Copy(RegionId, RegionId),
    /// A region inconsistent with the model (unknown ids or a factor outside its variables).
    BadRegion { region: RegionId, reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Disconnected(item) => write!(f, "C1: regions containing {item} are disconnected"),
            Violation::CountingSum { item, sum } => {
                write!(f, "C2: counting numbers over {item} sum to {sum}")
            }
            Violation::Copy(a, b) => write!(f, "regions {a} and {b} are copies"),
            Violation::BadRegion { region, reason } => write!(f, "region {region}: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub c1_ok: bool,
    pub c2_ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extendability {
    pub extendable: bool,
    /// An item whose region subgraph does not have exactly one leaf, with its leaf count.
    pub witness: Option<(Item, usize)>,
}

/// Result of inserting an outer region.
#[derive(Debug, Clone, PartialEq)]
pub struct Insertion {
    pub id: RegionId,
    pub children: Vec<RegionId>,
    /// Extendability of the enlarged graph (not guaranteed by the insertion itself).
    pub extendable: bool,
}

/// Directed acyclic graph of regions with parent-to-child edges.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionGraph {
    regions: Vec<Region>,
    parents: Vec<Vec<RegionId>>,
    children: Vec<Vec<RegionId>>,
    counting: Vec<i64>,
}

impl RegionGraph {
    /// Builds a graph with no duplicate regions.
    pub fn from_parts(regions: Vec<Region>, edges: &[(RegionId, RegionId)]) -> Result<Self> {
        let rg = Self::from_parts_allowing_copies(regions, edges)?;
        if let Some((a, _)) = rg.copies().first() {
            return Err(Error::DuplicateRegion(*a));
        }
        Ok(rg)
    }

    /// Like [`from_parts`](Self::from_parts) but tolerates identical regions, as
    /// produced transiently by a split before the copies are merged.
    pub fn from_parts_allowing_copies(regions: Vec<Region>, edges: &[(RegionId, RegionId)]) -> Result<Self> {
        let n = regions.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(p, c) in edges {
            if p >= n {
                return Err(Error::UnknownRegion(p));
            }
            if c >= n {
                return Err(Error::UnknownRegion(c));
            }
            if p == c {
                return Err(Error::CycleDetected);
            }
            if !regions[p].contains(&regions[c]) {
                return Err(Error::NotSubregion { parent: p, child: c });
            }
            children[p].push(c);
            parents[c].push(p);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        let mut rg = RegionGraph {
            regions,
            parents,
            children,
            counting: vec![0; n],
        };
        rg.recompute_counting()?;
        Ok(rg)
    }

    /// Two-layer graph: one outer region per factor over its scope, one inner
    /// region per variable with no factors, and an edge from each factor region to
    /// each of its variables. Factor regions get ids `0..F`, variable regions `F..F+n`.
    pub fn bethe(fg: &FactorGraph) -> Self {
        let nf = fg.num_factors();
        let mut regions = Vec::with_capacity(nf + fg.num_vars());
        let mut edges = Vec::new();
        for f in fg.factors() {
            regions.push(Region {
                vars: f.scope.clone(),
                factors: vec![f.id],
            });
            edges.extend(f.scope.iter().map(|&v| (f.id, nf + v)));
        }
        for v in 0..fg.num_vars() {
            regions.push(Region {
                vars: vec![v],
                factors: Vec::new(),
            });
        }
        RegionGraph::from_parts(regions, &edges).expect("bethe construction is always well formed")
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, id: RegionId) -> &Region {
        &self.regions[id]
    }

    pub fn parents(&self, id: RegionId) -> &[RegionId] {
        &self.parents[id]
    }

    pub fn children(&self, id: RegionId) -> &[RegionId] {
        &self.children[id]
    }

    pub fn counting_numbers(&self) -> &[i64] {
        &self.counting
    }

    pub fn counting(&self, id: RegionId) -> i64 {
        self.counting[id]
    }

    /// All edges as `(parent, child)`, ordered by parent then child.
    pub fn edges(&self) -> Vec<(RegionId, RegionId)> {
        self.children
            .iter()
            .enumerate()
            .flat_map(|(p, cs)| cs.iter().map(move |&c| (p, c)))
            .collect()
    }

    pub fn num_edges(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, parent: RegionId, child: RegionId) -> bool {
        self.children.get(parent).is_some_and(|cs| cs.binary_search(&child).is_ok())
    }

    pub fn outer_regions(&self) -> Vec<RegionId> {
        (0..self.len()).filter(|&r| self.parents[r].is_empty()).collect()
    }

    /// Id of a region with exactly these contents.
    pub fn find(&self, region: &Region) -> Option<RegionId> {
        self.regions.iter().position(|r| r == region)
    }

    /// Pairs of regions with identical contents.
    pub fn copies(&self) -> Vec<(RegionId, RegionId)> {
        let mut order: Vec<RegionId> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.regions[a].cmp(&self.regions[b]).then(a.cmp(&b)));
        order
            .windows(2)
            .filter(|w| self.regions[w[0]] == self.regions[w[1]])
            .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
            .collect()
    }

    fn check_id(&self, id: RegionId) -> Result<()> {
        if id < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownRegion(id))
        }
    }

    /// Kahn order; parents before children, ties by id.
    pub fn topological_order(&self) -> Result<Vec<RegionId>> {
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<RegionId> = (0..self.len()).filter(|&r| indegree[r] == 0).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(r) = ready.pop_first() {
            order.push(r);
            for &c in &self.children[r] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() != self.len() {
            return Err(Error::CycleDetected);
        }
        Ok(order)
    }

    fn closure(&self, start: RegionId, upward: bool) -> BTreeSet<RegionId> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        while let Some(r) = queue.pop_front() {
            let next = if upward { &self.parents[r] } else { &self.children[r] };
            for &n in next {
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        seen
    }

    /// Regions with a directed path to `id` (excluding `id`).
    pub fn ancestors(&self, id: RegionId) -> Result<BTreeSet<RegionId>> {
        self.check_id(id)?;
        Ok(self.closure(id, true))
    }

    /// Regions reachable from `id` (excluding `id`).
    pub fn descendants(&self, id: RegionId) -> Result<BTreeSet<RegionId>> {
        self.check_id(id)?;
        Ok(self.closure(id, false))
    }

    /// Recomputes every counting number from the ancestor sets.
    pub(crate) fn recompute_counting(&mut self) -> Result<()> {
        self.counting = compute_counting_numbers(self)?;
        Ok(())
    }

    pub fn regions_containing(&self, item: Item) -> Vec<RegionId> {
        (0..self.len())
            .filter(|&r| match item {
                Item::Var(v) => self.regions[r].contains_var(v),
                Item::Factor(a) => self.regions[r].contains_factor(a),
            })
            .collect()
    }

    fn items(fg: &FactorGraph) -> impl Iterator<Item = Item> {
        (0..fg.num_vars())
            .map(Item::Var)
            .chain((0..fg.num_factors()).map(Item::Factor))
    }

    /// Checks C1 (connectivity) and C2 (unit counting sums) for every variable and factor.
    pub fn check_validity(&self, fg: &FactorGraph) -> ValidityReport {
        let mut violations = Vec::new();
        for (id, r) in self.regions.iter().enumerate() {
            if let Err(e) = r.validate(fg) {
                violations.push(Violation::BadRegion {
                    region: id,
                    reason: e.to_string(),
                });
            }
        }
        let mut c1_ok = true;
        let mut c2_ok = true;
        for item in Self::items(fg) {
            let members = self.regions_containing(item);
            if !members.is_empty() && !self.weakly_connected(&members) {
                c1_ok = false;
                violations.push(Violation::Disconnected(item));
            }
            let sum: i64 = members.iter().map(|&r| self.counting[r]).sum();
            if sum != 1 {
                c2_ok = false;
                violations.push(Violation::CountingSum { item, sum });
            }
        }
        violations.extend(self.copies().into_iter().map(|(a, b)| Violation::Copy(a, b)));
        ValidityReport {
            c1_ok,
            c2_ok,
            violations,
        }
    }

    /// Weak connectivity of the subgraph induced by the sorted id list `members`.
    fn weakly_connected(&self, members: &[RegionId]) -> bool {
        let inside = |r: &RegionId| members.binary_search(r).is_ok();
        let mut seen = BTreeSet::from([members[0]]);
        let mut queue = VecDeque::from([members[0]]);
        while let Some(r) = queue.pop_front() {
            for n in self.parents[r].iter().chain(&self.children[r]) {
                if inside(n) && seen.insert(*n) {
                    queue.push_back(*n);
                }
            }
        }
        seen.len() == members.len()
    }

    /// Leaves of the subgraph of regions containing `item`.
    pub fn leaves_of(&self, item: Item) -> Vec<RegionId> {
        let members = self.regions_containing(item);
        members
            .iter()
            .copied()
            .filter(|&r| !self.children[r].iter().any(|c| members.binary_search(c).is_ok()))
            .collect()
    }

    /// True iff every variable's and every factor's region subgraph has exactly one leaf.
    pub fn is_extendable(&self, fg: &FactorGraph) -> Extendability {
        for item in Self::items(fg) {
            let leaves = self.leaves_of(item).len();
            if leaves != 1 {
                return Extendability {
                    extendable: false,
                    witness: Some((item, leaves)),
                };
            }
        }
        Extendability {
            extendable: true,
            witness: None,
        }
    }

    /// Existing subregions of `candidate` that no other existing subregion of it strictly contains.
    pub fn direct_subregions(&self, candidate: &Region) -> Result<Vec<RegionId>> {
        if let Some(id) = self.find(candidate) {
            return Err(Error::DuplicateRegion(id));
        }
        Ok(self.maximal_subregions(candidate, 0..self.len()))
    }

    /// Maximal elements (under strict containment) among `pool` regions contained in `candidate`.
    pub(crate) fn maximal_subregions(
        &self,
        candidate: &Region,
        pool: impl IntoIterator<Item = RegionId>,
    ) -> Vec<RegionId> {
        let subs: Vec<RegionId> = pool
            .into_iter()
            .filter(|&r| candidate.contains(&self.regions[r]))
            .collect();
        let mut out: Vec<RegionId> = subs
            .iter()
            .copied()
            .filter(|&r| {
                !subs.iter().any(|&s| {
                    s != r && self.regions[s] != self.regions[r] && self.regions[s].contains(&self.regions[r])
                })
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Inserts `candidate` as an outer region connected to its direct subregions.
    ///
    /// Requires an extendable graph, a candidate consistent with the model whose
    /// factors already appear in the graph, and no existing region with the same
    /// contents. Extendability of the result is re-checked and reported.
    pub fn add_outer_region(&mut self, candidate: Region, fg: &FactorGraph) -> Result<Insertion> {
        candidate.validate(fg)?;
        if let Some(id) = self.find(&candidate) {
            return Err(Error::DuplicateRegion(id));
        }
        let ext = self.is_extendable(fg);
        if !ext.extendable {
            let (item, leaves) = ext.witness.expect("non-extendable graphs carry a witness");
            return Err(Error::NotExtendable(format!("{item} has {leaves} leaves")));
        }
        let mut placed = vec![false; fg.num_factors()];
        for r in &self.regions {
            for &a in &r.factors {
                placed[a] = true;
            }
        }
        if let Some(&a) = candidate.factors.iter().find(|&&a| !placed[a]) {
            return Err(Error::UnplacedFactor(a));
        }
        let children = self.direct_subregions(&candidate)?;
        let id = self.insert_unchecked(candidate, &children);
        self.recompute_counting()?;
        Ok(Insertion {
            id,
            children,
            extendable: self.is_extendable(fg).extendable,
        })
    }

    /// Appends a region with edges to `children` without recomputing counting numbers.
    pub(crate) fn insert_unchecked(&mut self, region: Region, children: &[RegionId]) -> RegionId {
        let id = self.regions.len();
        self.regions.push(region);
        self.parents.push(Vec::new());
        self.children.push(children.to_vec());
        self.counting.push(0);
        for &c in children {
            let ps = &mut self.parents[c];
            if let Err(pos) = ps.binary_search(&id) {
                ps.insert(pos, id);
            }
        }
        id
    }

    /// Smallest region containing `var` (ties to the lowest id), used to read node marginals.
    pub fn marginal_region(&self, var: VarId) -> Option<RegionId> {
        (0..self.len())
            .filter(|&r| self.regions[r].contains_var(var))
            .min_by_key(|&r| (self.regions[r].vars.len(), r))
    }
}

/// `c_r = 1 - sum_{a in Anc(r)} c_a`, evaluated in topological order.
pub fn compute_counting_numbers(rg: &RegionGraph) -> Result<Vec<i64>> {
    let order = rg.topological_order()?;
    let n = rg.len();
    let words = n.div_ceil(64).max(1);
    let mut anc = vec![vec![0u64; words]; n];
    let mut counting = vec![0i64; n];
    for &r in &order {
        let mut set = vec![0u64; words];
        for &p in rg.parents(r) {
            for (s, a) in set.iter_mut().zip(&anc[p]) {
                *s |= *a;
            }
            set[p / 64] |= 1 << (p % 64);
        }
        let mut total = 0i64;
        for (w, &bits) in set.iter().enumerate() {
            let mut b = bits;
            while b != 0 {
                let k = b.trailing_zeros() as usize;
                b &= b - 1;
                total += counting[w * 64 + k];
            }
        }
        counting[r] = 1 - total;
        anc[r] = set;
    }
    Ok(counting)
}
