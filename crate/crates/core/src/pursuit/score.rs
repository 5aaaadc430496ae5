use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exact::{avg_l1_error, ExactResult};
use crate::factor_graph::FactorGraph;
use crate::gbp::{node_marginals, region_free_energy, rg_free_energy, BeliefSet, GbpEngine, GbpOptions, GbpState};
use crate::region_graph::{Region, RegionGraph};

/// A candidate score; `valid` is false when the GBP run behind it did not converge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub value: f64,
    pub valid: bool,
    pub iterations: usize,
}

impl Score {
    pub fn usable(&self) -> Option<f64> {
        (self.valid && self.value.is_finite()).then_some(self.value)
    }
}

/// How the local free-energy change is read off after the frozen-message run.
///
/// With S the candidate and its descendants, `c` the counting numbers before
/// insertion (zero for the candidate) and `c'` after it:
/// `CountingChange` is `|sum_S (c'_r - c_r) F_r(b'_r)|`, every term at the new
/// beliefs; `FrozenDifference` is `|sum_S c'_r F_r(b'_r) - sum_S c_r F_r(b_r)|`
/// with the old beliefs on the old side. The second also picks up belief shifts
/// inside S that only cancel once the rest of the graph relaxes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocalScore {
    #[default]
    CountingChange,
    FrozenDifference,
}

/// An immutable snapshot of a converged (or best-effort) GBP run that candidates are scored against.
#[derive(Debug, Clone)]
pub struct Snapshot<'a> {
    pub rg: &'a RegionGraph,
    pub fg: &'a FactorGraph,
    pub state: &'a GbpState,
    pub beliefs: &'a BeliefSet,
    /// Dampings retried, in order, when a run does not converge.
    pub fallback_damping: &'a [f64],
    pub local_score: LocalScore,
}

impl<'a> Snapshot<'a> {
    fn insert(&self, candidate: &Region) -> Result<(RegionGraph, usize)> {
        let mut rg = self.rg.clone();
        let ins = rg.add_outer_region(candidate.clone(), self.fg)?;
        Ok((rg, ins.id))
    }

    /// Local free-energy change of inserting `candidate` with every message
    /// entering the candidate and its descendants frozen.
    pub fn local_delta_f(&self, candidate: &Region, opts: &GbpOptions) -> Result<Score> {
        let (rg, id) = self.insert(candidate)?;
        let mut s = rg.descendants(id)?;
        s.insert(id);
        let engine = GbpEngine::new(&rg, self.fg)?;
        let active: Vec<bool> = engine.edges().iter().map(|(p, _)| s.contains(p)).collect();
        let run = engine.run_with_fallback(opts, Some(self.state), Some(&active), self.fallback_damping)?;
        let mut after = 0.0;
        let mut before = 0.0;
        for &r in &s {
            let c_new = rg.counting(r);
            let c_old = if r == id { 0 } else { self.rg.counting(r) };
            match self.local_score {
                LocalScore::CountingChange => {
                    if c_new != c_old {
                        after += (c_new - c_old) as f64 * region_free_energy(&rg, self.fg, &run.beliefs, r)?;
                    }
                }
                LocalScore::FrozenDifference => {
                    if c_new != 0 {
                        after += c_new as f64 * region_free_energy(&rg, self.fg, &run.beliefs, r)?;
                    }
                    if c_old != 0 {
                        before += c_old as f64 * region_free_energy(self.rg, self.fg, self.beliefs, r)?;
                    }
                }
            }
        }
        Ok(Score {
            value: (after - before).abs(),
            valid: run.state.converged,
            iterations: run.state.iteration,
        })
    }

    /// Change of the full region-graph free energy after inserting `candidate`
    /// and re-running GBP everywhere from the snapshot's messages.
    pub fn full_delta_f(&self, candidate: &Region, opts: &GbpOptions) -> Result<Score> {
        let (rg, _) = self.insert(candidate)?;
        let run = GbpEngine::new(&rg, self.fg)?.run_with_fallback(opts, Some(self.state), None, self.fallback_damping)?;
        let before = rg_free_energy(self.rg, self.fg, self.beliefs)?;
        let after = rg_free_energy(&rg, self.fg, &run.beliefs)?;
        Ok(Score {
            value: (after - before).abs(),
            valid: run.state.converged,
            iterations: run.state.iteration,
        })
    }

    /// Average L1 marginal error after inserting `candidate` and re-running GBP.
    pub fn l1_after(&self, candidate: &Region, opts: &GbpOptions, exact: &ExactResult) -> Result<Score> {
        let (rg, _) = self.insert(candidate)?;
        let run = GbpEngine::new(&rg, self.fg)?.run_with_fallback(opts, Some(self.state), None, self.fallback_damping)?;
        let marg = node_marginals(&rg, self.fg, &run.beliefs)?;
        Ok(Score {
            value: avg_l1_error(&marg, exact)?,
            valid: run.state.converged,
            iterations: run.state.iteration,
        })
    }
}

/// `local_delta_f` against a state, computing that state's beliefs first.
pub fn local_delta_f(
    rg: &RegionGraph,
    fg: &FactorGraph,
    state: &GbpState,
    candidate: &Region,
    opts: &GbpOptions,
    local_score: LocalScore,
) -> Result<Score> {
    let beliefs = GbpEngine::new(rg, fg)?.beliefs(state);
    Snapshot {
        rg,
        fg,
        state,
        beliefs: &beliefs,
        fallback_damping: &[],
        local_score,
    }
    .local_delta_f(candidate, opts)
}
