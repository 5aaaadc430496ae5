//! Parent-to-child generalized belief propagation.
//!
//! Every region-graph edge `alpha -> delta` carries a message over the child's
//! variables. The belief of a region is its factor product times every message
//! `gamma -> beta` that enters its closed descendant set from outside. An update
//! multiplies the message by the ratio of the parent belief marginal to the child
//! belief, which is the identity exactly when the two are consistent.
//!
//! All arithmetic is in the log domain. Messages are kept normalized.

mod free_energy;

pub use free_energy::{
    node_marginals, region_log_potential, region_entropy, region_free_energy, rg_entropy, rg_free_energy, transfer_beliefs,
};

use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor_graph::FactorGraph;
use crate::region_graph::{RegionGraph, RegionId};
use crate::table::{log_normalize, marginalize_log, projection};

/// Largest region table the engine will allocate.
pub const MAX_REGION_STATES: usize = 1 << 22;
/// Child beliefs below this are treated as underflow in the update ratio.
pub const BELIEF_UNDERFLOW: f64 = 1e-300;
/// Message entry used when the child belief underflows.
pub const MESSAGE_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Parents in topological order, each parent's edges in child-id order.
    TopDownRoundRobin,
    /// A fresh seeded permutation of all edges every sweep.
    RandomPermutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbpOptions {
    /// Weight of the old log-message in `(1 - damping) * new + damping * old`.
    pub damping: f64,
    /// Convergence threshold on the largest absolute log-message change in a sweep.
    pub tolerance: f64,
    pub max_iters: usize,
    pub schedule: Schedule,
    pub seed: u64,
    /// Initialize fresh messages randomly instead of uniformly.
    pub random_init: bool,
}

impl Default for GbpOptions {
    fn default() -> Self {
        GbpOptions {
            damping: 0.5,
            tolerance: 1e-9,
            max_iters: 2000,
            schedule: Schedule::TopDownRoundRobin,
            seed: 0,
            random_init: false,
        }
    }
}

impl GbpOptions {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::InvalidParameter(format!("damping {} not in [0, 1)", self.damping)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {} must be > 0", self.tolerance)));
        }
        Ok(())
    }
}

/// One log-domain message per region-graph edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub parent: RegionId,
    pub child: RegionId,
    /// Natural-log entries over the child's variables; `exp` sums to one.
    pub log_values: Vec<f64>,
}

impl Message {
    pub fn values(&self) -> Vec<f64> {
        self.log_values.iter().map(|v| v.exp()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbpState {
    /// Aligned with `RegionGraph::edges()`.
    pub messages: Vec<Message>,
    pub iteration: usize,
    pub converged: bool,
    pub max_residual: f64,
}

/// Normalized probability table per region, indexed by region id.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefSet {
    pub tables: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub iterations: usize,
    /// Largest log-message change of each sweep.
    pub residuals: Vec<f64>,
    /// Updates in which a child belief underflowed and the message was floored.
    pub clamp_count: usize,
    /// Regions with counting number zero; the engine runs on them but they weaken fixed-point guarantees.
    pub zero_counting_regions: Vec<RegionId>,
}

impl Diagnostics {
    /// CSV rows `iteration,max_residual,clamp_count` (clamp count repeated as a running total column).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "max_residual", "clamp_count"])?;
        for (k, r) in self.residuals.iter().enumerate() {
            w.write_record([(k + 1).to_string(), format!("{r:e}"), self.clamp_count.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GbpRun {
    pub state: GbpState,
    pub beliefs: BeliefSet,
    pub diagnostics: Diagnostics,
}

/// Edges `gamma -> beta` whose messages enter the belief of `r`: `beta` lies in
/// `r` or below it while `gamma` does not.
pub fn u_set(rg: &RegionGraph, r: RegionId) -> Result<Vec<(RegionId, RegionId)>> {
    let mut closed = rg.descendants(r)?;
    closed.insert(r);
    let mut out = Vec::new();
    for &beta in &closed {
        for &gamma in rg.parents(beta) {
            if !closed.contains(&gamma) {
                out.push((gamma, beta));
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Precomputed tables and index maps for running GBP on one (region graph, model) pair.
#[derive(Debug, Clone)]
pub struct GbpEngine<'a> {
    rg: &'a RegionGraph,
    log_psi: Vec<Vec<f64>>,
    edges: Vec<(RegionId, RegionId)>,
    edge_index: HashMap<(RegionId, RegionId), usize>,
    /// parent-table index -> child-table index, per edge
    edge_proj: Vec<usize>,
    /// per region: (edge, projection id) for every incoming message of its belief
    incoming: Vec<Vec<(usize, usize)>>,
    projections: Vec<Vec<usize>>,
    schedule_order: Vec<usize>,
}

impl<'a> GbpEngine<'a> {
    pub fn new(rg: &'a RegionGraph, fg: &FactorGraph) -> Result<Self> {
        let n = rg.len();
        let mut log_psi = Vec::with_capacity(n);
        for region in rg.regions() {
            region.validate(fg)?;
            log_psi.push(region_log_potential(region, fg)?);
        }

        let mut projections: Vec<Vec<usize>> = Vec::new();
        let mut proj_ids: HashMap<(RegionId, RegionId), usize> = HashMap::new();
        let mut proj_for = |sup: RegionId, sub: RegionId, projections: &mut Vec<Vec<usize>>| -> usize {
            *proj_ids.entry((sup, sub)).or_insert_with(|| {
                let s = rg.region(sup);
                let cards: Vec<usize> = s.vars.iter().map(|&v| fg.card(v)).collect();
                projections.push(projection(&s.vars, &cards, &rg.region(sub).vars));
                projections.len() - 1
            })
        };

        let edges = rg.edges();
        let edge_index: HashMap<(RegionId, RegionId), usize> =
            edges.iter().enumerate().map(|(k, &e)| (e, k)).collect();
        let edge_proj = edges
            .iter()
            .map(|&(p, c)| proj_for(p, c, &mut projections))
            .collect();
        let mut incoming = Vec::with_capacity(n);
        for r in 0..n {
            let list = u_set(rg, r)?
                .into_iter()
                .map(|(g, b)| (edge_index[&(g, b)], proj_for(r, b, &mut projections)))
                .collect();
            incoming.push(list);
        }

        let topo = rg.topological_order()?;
        let mut rank = vec![0; n];
        for (k, &r) in topo.iter().enumerate() {
            rank[r] = k;
        }
        let mut schedule_order: Vec<usize> = (0..edges.len()).collect();
        schedule_order.sort_by_key(|&e| (rank[edges[e].0], edges[e].1));

        Ok(GbpEngine {
            rg,
            log_psi,
            edges,
            edge_index,
            edge_proj,
            incoming,
            projections,
            schedule_order,
        })
    }

    pub fn region_graph(&self) -> &RegionGraph {
        self.rg
    }

    pub fn edges(&self) -> &[(RegionId, RegionId)] {
        &self.edges
    }

    pub fn edge_id(&self, parent: RegionId, child: RegionId) -> Option<usize> {
        self.edge_index.get(&(parent, child)).copied()
    }

    /// Sum of the region's factor log-tables over its joint states.
    pub fn log_potential(&self, r: RegionId) -> &[f64] {
        &self.log_psi[r]
    }

    /// Uniform (or seeded random) messages, with entries from `init` reused for matching edges.
    pub fn initial_state(&self, opts: &GbpOptions, init: Option<&GbpState>) -> GbpState {
        let previous: HashMap<(RegionId, RegionId), &Vec<f64>> = init
            .map(|s| s.messages.iter().map(|m| ((m.parent, m.child), &m.log_values)).collect())
            .unwrap_or_default();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9e37_79b9_7f4a_7c15);
        let messages = self
            .edges
            .iter()
            .map(|&(p, c)| {
                let size = self.log_psi[c].len();
                let log_values = match previous.get(&(p, c)) {
                    Some(v) if v.len() == size => (*v).clone(),
                    _ if opts.random_init => {
                        let mut v: Vec<f64> = (0..size).map(|_| rng.random::<f64>().max(1e-3).ln()).collect();
                        log_normalize(&mut v);
                        v
                    }
                    _ => vec![-(size as f64).ln(); size],
                };
                Message {
                    parent: p,
                    child: c,
                    log_values,
                }
            })
            .collect();
        GbpState {
            messages,
            iteration: 0,
            converged: false,
            max_residual: f64::INFINITY,
        }
    }

    /// Normalized log-belief of region `r` under the current messages.
    pub fn log_belief(&self, state: &GbpState, r: RegionId) -> Vec<f64> {
        let mut b = self.log_psi[r].clone();
        for &(e, p) in &self.incoming[r] {
            let m = &state.messages[e].log_values;
            for (bx, &ix) in b.iter_mut().zip(&self.projections[p]) {
                *bx += m[ix];
            }
        }
        log_normalize(&mut b);
        b
    }

    pub fn belief(&self, state: &GbpState, r: RegionId) -> Vec<f64> {
        self.log_belief(state, r).into_iter().map(f64::exp).collect()
    }

    pub fn beliefs(&self, state: &GbpState) -> BeliefSet {
        BeliefSet {
            tables: (0..self.rg.len()).map(|r| self.belief(state, r)).collect(),
        }
    }

    /// The damped, normalized replacement for message `edge`, and the number of
    /// underflow clamps applied while forming it.
    pub fn updated_message(&self, state: &GbpState, edge: usize, damping: f64) -> (Vec<f64>, usize) {
        let (parent, child) = self.edges[edge];
        let parent_belief = self.log_belief(state, parent);
        let child_size = self.log_psi[child].len();
        let marginal = marginalize_log(&parent_belief, &self.projections[self.edge_proj[edge]], child_size);
        let child_belief = self.log_belief(state, child);
        let old = &state.messages[edge].log_values;
        let floor = MESSAGE_FLOOR.ln();
        let underflow = BELIEF_UNDERFLOW.ln();
        let mut clamps = 0;
        let mut fresh: Vec<f64> = (0..child_size)
            .map(|x| {
                let v = if child_belief[x] < underflow {
                    floor
                } else {
                    marginal[x] - child_belief[x] + old[x]
                };
                if v.is_finite() && child_belief[x] >= underflow {
                    v
                } else {
                    clamps += 1;
                    floor
                }
            })
            .collect();
        log_normalize(&mut fresh);
        if damping > 0.0 {
            for (f, o) in fresh.iter_mut().zip(old) {
                *f = (1.0 - damping) * *f + damping * o;
            }
            log_normalize(&mut fresh);
        }
        (fresh, clamps)
    }

    /// Applies one update in place; returns the largest absolute log change.
    pub fn update_message(&self, state: &mut GbpState, edge: usize, damping: f64) -> (f64, usize) {
        let (fresh, clamps) = self.updated_message(state, edge, damping);
        let old = &mut state.messages[edge].log_values;
        let residual = fresh
            .iter()
            .zip(old.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        *old = fresh;
        (residual, clamps)
    }

    /// Runs sweeps until the residual drops below tolerance or `max_iters` is hit.
    pub fn run(&self, opts: &GbpOptions, init: Option<&GbpState>) -> Result<GbpRun> {
        self.run_restricted(opts, init, None)
    }

    /// As [`run`](Self::run), but only edges with `active[edge]` are updated; all
    /// other messages stay frozen at their initial values.
    pub fn run_restricted(
        &self,
        opts: &GbpOptions,
        init: Option<&GbpState>,
        active: Option<&[bool]>,
    ) -> Result<GbpRun> {
        opts.validate()?;
        let mut state = self.initial_state(opts, init);
        let mut diagnostics = Diagnostics {
            zero_counting_regions: (0..self.rg.len()).filter(|&r| self.rg.counting(r) == 0).collect(),
            ..Default::default()
        };
        let mut order: Vec<usize> = self
            .schedule_order
            .iter()
            .copied()
            .filter(|&e| active.is_none_or(|a| a[e]))
            .collect();

        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        state.max_residual = 0.0;
        if order.is_empty() {
            state.converged = true;
        }
        while !state.converged && state.iteration < opts.max_iters {
            if opts.schedule == Schedule::RandomPermutation {
                order.shuffle(&mut rng);
            }
            let mut sweep = 0.0f64;
            for &e in &order {
                let (res, clamps) = self.update_message(&mut state, e, opts.damping);
                sweep = sweep.max(res);
                diagnostics.clamp_count += clamps;
            }
            state.iteration += 1;
            state.max_residual = sweep;
            diagnostics.residuals.push(sweep);
            if sweep < opts.tolerance {
                state.converged = true;
            }
        }
        diagnostics.iterations = state.iteration;
        let beliefs = self.beliefs(&state);
        Ok(GbpRun {
            state,
            beliefs,
            diagnostics,
        })
    }

    /// Runs with `opts`; if that does not converge, retries from the same
    /// starting messages with each damping in `fallback` in turn. Returns the
    /// first converged run, or the last attempt.
    pub fn run_with_fallback(
        &self,
        opts: &GbpOptions,
        init: Option<&GbpState>,
        active: Option<&[bool]>,
        fallback: &[f64],
    ) -> Result<GbpRun> {
        let mut run = self.run_restricted(opts, init, active)?;
        for &damping in fallback {
            if run.state.converged {
                break;
            }
            let retry = GbpOptions { damping, ..*opts };
            let mut next = self.run_restricted(&retry, init, active)?;
            next.diagnostics.clamp_count += run.diagnostics.clamp_count;
            run = next;
        }
        Ok(run)
    }

    /// Largest `|sum_{x_parent \ x_child} b_parent - b_child|` over all edges.
    pub fn max_inconsistency(&self, beliefs: &BeliefSet) -> f64 {
        let mut worst = 0.0f64;
        for (e, &(p, c)) in self.edges.iter().enumerate() {
            let mut marg = vec![0.0; beliefs.tables[c].len()];
            for (b, &ix) in beliefs.tables[p].iter().zip(&self.projections[self.edge_proj[e]]) {
                marg[ix] += b;
            }
            for (m, b) in marg.iter().zip(&beliefs.tables[c]) {
                worst = worst.max((m - b).abs());
            }
        }
        worst
    }

    /// Regions whose belief depends on the message of `edge`.
    pub fn dependents(&self, edge: usize) -> BTreeSet<RegionId> {
        (0..self.rg.len())
            .filter(|&r| self.incoming[r].iter().any(|&(e, _)| e == edge))
            .collect()
    }
}

/// Builds an engine and runs it once.
pub fn run_gbp(
    rg: &RegionGraph,
    fg: &FactorGraph,
    opts: &GbpOptions,
    init: Option<&GbpState>,
) -> Result<GbpRun> {
    GbpEngine::new(rg, fg)?.run(opts, init)
}

#[cfg(test)]
mod tests;
