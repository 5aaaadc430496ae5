//! Region-graph rewrites that leave the region free energy unchanged, plus the
//! structural analysis used to pick candidate regions.
//!
//! Each transform takes a graph by reference and returns a new one. Region ids of
//! the result are renumbered when regions are removed or replaced; regions that
//! survive keep their relative order.

mod irreducible;
mod width;

pub use irreducible::{decompose_weakly_irreducible, interaction_components, strip_pendant_trees};
pub use width::{region_width, RegionWidth};

use std::collections::BTreeSet;
use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::factor_graph::{FactorGraph, FactorId, VarId};
use crate::region_graph::{is_sorted_subset, Region, RegionGraph, RegionId};

/// Adds the edge `ancestor -> descendant` for a strict, non-child descendant.
///
/// No ancestor set changes, so every counting number stays the same.
pub fn link_birth(rg: &RegionGraph, ancestor: RegionId, descendant: RegionId) -> Result<RegionGraph> {
    let desc = rg.descendants(ancestor)?;
    if descendant >= rg.len() {
        return Err(Error::UnknownRegion(descendant));
    }
    if rg.has_edge(ancestor, descendant) {
        return Err(Error::Precondition(format!(
            "edge {ancestor} -> {descendant} already exists"
        )));
    }
    if !desc.contains(&descendant) {
        return Err(Error::Precondition(format!(
            "region {descendant} is not a descendant of {ancestor}"
        )));
    }
    let mut edges = rg.edges();
    edges.push((ancestor, descendant));
    RegionGraph::from_parts_allowing_copies(rg.regions().to_vec(), &edges)
}

/// Removes a region with counting number zero and connects each of its parents
/// to each of its children.
pub fn death(rg: &RegionGraph, r: RegionId) -> Result<RegionGraph> {
    if r >= rg.len() {
        return Err(Error::UnknownRegion(r));
    }
    if rg.counting(r) != 0 {
        return Err(Error::Precondition(format!(
            "region {r} has counting number {}, death requires 0",
            rg.counting(r)
        )));
    }
    let mut edges: Vec<(RegionId, RegionId)> = rg
        .edges()
        .into_iter()
        .filter(|&(p, c)| p != r && c != r)
        .collect();
    for &p in rg.parents(r) {
        for &c in rg.children(r) {
            edges.push((p, c));
        }
    }
    rebuild(rg, |id| id != r, Vec::new(), edges)
}

/// Applies `death` to every region with counting number zero.
///
/// The result has the same free energy and GBP fixed points as `rg`, but may
/// lose extendability.
pub fn prune_zero_counting(rg: &RegionGraph) -> Result<RegionGraph> {
    let mut out = rg.clone();
    while let Some(r) = (0..out.len()).rev().find(|&r| out.counting(r) == 0) {
        out = death(&out, r)?;
    }
    Ok(out)
}

/// Merges two identical regions `r1 -> r2` into one, redirecting all their edges.
///
/// Requires every descendant of `r1` other than `r2` to be a descendant of `r2`.
/// The merged region keeps the position of `r2`; its counting number is
/// `c_{r1} + c_{r2}`.
pub fn merge(rg: &RegionGraph, r1: RegionId, r2: RegionId) -> Result<RegionGraph> {
    for id in [r1, r2] {
        if id >= rg.len() {
            return Err(Error::UnknownRegion(id));
        }
    }
    if r1 == r2 || rg.region(r1) != rg.region(r2) {
        return Err(Error::Precondition(format!("regions {r1} and {r2} are not identical")));
    }
    if !rg.has_edge(r1, r2) {
        return Err(Error::Precondition(format!("region {r1} is not a parent of {r2}")));
    }
    let d1 = rg.descendants(r1)?;
    let d2 = rg.descendants(r2)?;
    if let Some(bad) = d1.iter().find(|&&d| d != r2 && !d2.contains(&d)) {
        return Err(Error::Precondition(format!(
            "descendant {bad} of {r1} is not a descendant of {r2}"
        )));
    }
    let edges: Vec<(RegionId, RegionId)> = rg
        .edges()
        .into_iter()
        .map(|(p, c)| (if p == r1 { r2 } else { p }, if c == r1 { r2 } else { c }))
        .filter(|(p, c)| p != c)
        .collect();
    rebuild(rg, |id| id != r1, Vec::new(), edges)
}

/// Variables and factors of one side of a split; either set may be empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RegionPart {
    pub vars: Vec<VarId>,
    pub factors: Vec<FactorId>,
}

impl RegionPart {
    pub fn new(mut vars: Vec<VarId>, mut factors: Vec<FactorId>) -> Self {
        vars.sort_unstable();
        vars.dedup();
        factors.sort_unstable();
        factors.dedup();
        RegionPart { vars, factors }
    }

    fn union(&self, other: &RegionPart) -> RegionPart {
        RegionPart::new(
            self.vars.iter().chain(&other.vars).copied().collect(),
            self.factors.iter().chain(&other.factors).copied().collect(),
        )
    }

    fn to_region(&self) -> Option<Region> {
        Region::new(self.vars.clone(), self.factors.clone()).ok()
    }
}

/// Split of an outer region into `alpha1 + beta` and `alpha2 + beta` with the
/// separator `beta` as their common child.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    pub target: RegionId,
    pub alpha1: RegionPart,
    pub alpha2: RegionPart,
    pub beta: RegionPart,
}

fn disjoint(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_err())
}

impl SplitSpec {
    /// Checks partition, separation and child containment against `rg` and `fg`.
    pub fn verify(&self, rg: &RegionGraph, fg: &FactorGraph) -> Result<()> {
        if self.target >= rg.len() {
            return Err(Error::UnknownRegion(self.target));
        }
        if !rg.parents(self.target).is_empty() {
            return Err(Error::Precondition(format!("region {} is not outer", self.target)));
        }
        let target = rg.region(self.target);
        let (a1, a2, b) = (&self.alpha1, &self.alpha2, &self.beta);
        let whole = a1.union(a2).union(b);
        let pairwise_disjoint = disjoint(&a1.vars, &a2.vars)
            && disjoint(&a1.vars, &b.vars)
            && disjoint(&a2.vars, &b.vars)
            && disjoint(&a1.factors, &a2.factors)
            && disjoint(&a1.factors, &b.factors)
            && disjoint(&a2.factors, &b.factors);
        if !pairwise_disjoint || whole.vars != target.vars || whole.factors != target.factors {
            return Err(Error::Precondition(
                "alpha1, alpha2 and beta must partition the target's variables and factors".into(),
            ));
        }
        if a1.vars.is_empty() || a2.vars.is_empty() {
            return Err(Error::Precondition("both split sides need variables".into()));
        }
        let side1 = a1.union(b);
        let side2 = a2.union(b);
        for (part, vars) in [(a1, &side1.vars), (a2, &side2.vars), (b, &b.vars)] {
            if let Some(&f) = part.factors.iter().find(|&&f| !is_sorted_subset(&fg.factor(f).scope, vars)) {
                return Err(Error::Precondition(format!(
                    "factor {f} does not fit inside its side of the split"
                )));
            }
        }
        // separation: no path from alpha1 to alpha2 once beta is removed
        let mut adj: Vec<Vec<VarId>> = vec![Vec::new(); fg.num_vars()];
        for &f in &target.factors {
            let scope = &fg.factor(f).scope;
            for &x in scope {
                for &y in scope {
                    if x != y && b.vars.binary_search(&x).is_err() && b.vars.binary_search(&y).is_err() {
                        adj[x].push(y);
                    }
                }
            }
        }
        let mut seen: BTreeSet<VarId> = a1.vars.iter().copied().collect();
        let mut queue: VecDeque<VarId> = a1.vars.iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            if a2.vars.binary_search(&v).is_ok() {
                return Err(Error::Precondition(format!(
                    "beta does not separate alpha1 from alpha2 (variable {v} reachable)"
                )));
            }
            for &w in &adj[v] {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        let r1 = side1.to_region().expect("alpha1 is nonempty");
        let r2 = side2.to_region().expect("alpha2 is nonempty");
        for &c in rg.children(self.target) {
            let child = rg.region(c);
            if !r1.contains(child) && !r2.contains(child) {
                return Err(Error::Precondition(format!(
                    "child region {c} fits in neither side of the split"
                )));
            }
        }
        Ok(())
    }
}

/// Replaces an outer region by two overlapping outer regions and their separator.
///
/// The separator is connected to the topmost regions below the target that it
/// contains (copies of itself included); every other former child is attached to
/// the side that contains it. Copies created this way are merged when the merge
/// precondition holds; any copy that cannot be merged is an error.
pub fn split(rg: &RegionGraph, fg: &FactorGraph, spec: &SplitSpec) -> Result<RegionGraph> {
    spec.verify(rg, fg)?;
    let t = spec.target;
    let side1 = spec.alpha1.union(&spec.beta).to_region().expect("nonempty");
    let side2 = spec.alpha2.union(&spec.beta).to_region().expect("nonempty");
    let sep = spec.beta.to_region();

    let below = rg.descendants(t)?;
    let n = rg.len();
    let (id1, id2) = (n, n + 1);
    let mut regions = rg.regions().to_vec();
    regions.push(side1.clone());
    regions.push(side2.clone());
    let mut edges: Vec<(RegionId, RegionId)> = rg.edges().into_iter().filter(|&(p, _)| p != t).collect();

    let mut under_sep: BTreeSet<RegionId> = BTreeSet::new();
    if let Some(sep) = sep {
        let id_sep = n + 2;
        regions.push(sep.clone());
        edges.push((id1, id_sep));
        edges.push((id2, id_sep));
        let inside: Vec<RegionId> = below.iter().copied().filter(|&d| sep.contains(rg.region(d))).collect();
        for &d in &inside {
            let dominated = inside
                .iter()
                .any(|&o| o != d && rg.descendants(o).map(|s| s.contains(&d)).unwrap_or(false));
            if !dominated {
                edges.push((id_sep, d));
            }
        }
        for &d in &inside {
            under_sep.insert(d);
            under_sep.extend(rg.descendants(d)?);
        }
    }
    for &c in rg.children(t) {
        if under_sep.contains(&c) {
            continue;
        }
        if side1.contains(rg.region(c)) {
            edges.push((id1, c));
        } else if side2.contains(rg.region(c)) {
            edges.push((id2, c));
        }
    }
    let staged = rebuild_raw(regions, edges, |id| id != t)?;
    merge_copies(staged)
}

/// Repeatedly merges parent/child copy pairs; fails if a copy cannot be merged.
fn merge_copies(mut rg: RegionGraph) -> Result<RegionGraph> {
    loop {
        let copies = rg.copies();
        let Some(&(a, b)) = copies.first() else {
            return Ok(rg);
        };
        let (r1, r2) = if rg.has_edge(a, b) {
            (a, b)
        } else if rg.has_edge(b, a) {
            (b, a)
        } else {
            return Err(Error::Precondition(format!(
                "split produced unrelated copies {a} and {b}"
            )));
        };
        rg = merge(&rg, r1, r2)
            .map_err(|e| Error::Precondition(format!("split produced copies that cannot be merged: {e}")))?;
    }
}

/// Keeps regions passing `keep`, appends `extra`, and remaps `edges` given in old ids
/// (ids `>= rg.len()` refer to `extra`).
fn rebuild(
    rg: &RegionGraph,
    keep: impl Fn(RegionId) -> bool,
    extra: Vec<Region>,
    edges: Vec<(RegionId, RegionId)>,
) -> Result<RegionGraph> {
    let mut regions = rg.regions().to_vec();
    regions.extend(extra);
    rebuild_raw(regions, edges, keep)
}

fn rebuild_raw(
    regions: Vec<Region>,
    edges: Vec<(RegionId, RegionId)>,
    keep: impl Fn(RegionId) -> bool,
) -> Result<RegionGraph> {
    let mut map = vec![None; regions.len()];
    let mut kept = Vec::new();
    for (id, r) in regions.into_iter().enumerate() {
        if keep(id) {
            map[id] = Some(kept.len());
            kept.push(r);
        }
    }
    let mut remapped: Vec<(RegionId, RegionId)> = edges
        .into_iter()
        .filter_map(|(p, c)| Some((map[p]?, map[c]?)))
        .collect();
    remapped.sort_unstable();
    remapped.dedup();
    RegionGraph::from_parts_allowing_copies(kept, &remapped)
}
