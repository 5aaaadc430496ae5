//! Region pursuit: grow a Bethe region graph one loop region at a time, picking
//! each region by how much it changes the free energy.

mod cycles;
mod score;

pub use cycles::enumerate_chordless_cycles;
pub use score::{local_delta_f, LocalScore, Score, Snapshot};

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{avg_l1_error, ExactResult};
use crate::factor_graph::{FactorGraph, VarId};
use crate::gbp::{node_marginals, rg_free_energy, GbpEngine, GbpOptions, GbpRun};
use crate::region_graph::{Region, RegionGraph};
use crate::transforms::{decompose_weakly_irreducible, region_width};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Smallest L1 error after a full GBP run; needs the exact oracle.
    Opt,
    /// Largest local free-energy change with frozen incoming messages.
    Rp,
    /// Largest free-energy change after a full GBP run.
    RpPlus,
    /// Smallest local free-energy change.
    RpMinus,
    /// Uniformly random.
    Rand,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [Strategy::Opt, Strategy::Rp, Strategy::RpPlus, Strategy::RpMinus, Strategy::Rand];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Opt => "OPT",
            Strategy::Rp => "RP",
            Strategy::RpPlus => "RP+",
            Strategy::RpMinus => "RP-",
            Strategy::Rand => "RAND",
        }
    }

    /// File-name friendly form.
    pub fn slug(self) -> &'static str {
        match self {
            Strategy::Opt => "opt",
            Strategy::Rp => "rp",
            Strategy::RpPlus => "rp_plus",
            Strategy::RpMinus => "rp_minus",
            Strategy::Rand => "rand",
        }
    }

    fn prefers_small(self) -> bool {
        matches!(self, Strategy::Opt | Strategy::RpMinus)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "OPT" => Ok(Strategy::Opt),
            "RP" => Ok(Strategy::Rp),
            "RP+" | "RP_PLUS" | "RPPLUS" => Ok(Strategy::RpPlus),
            "RP-" | "RP_MINUS" | "RPMINUS" => Ok(Strategy::RpMinus),
            "RAND" | "RANDOM" => Ok(Strategy::Rand),
            other => Err(Error::InvalidParameter(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PursuitConfig {
    /// Largest allowed region width.
    pub max_width: usize,
    /// Total number of regions to add.
    pub max_regions: usize,
    /// Regions added per iteration.
    pub per_iteration: usize,
    pub max_loop_len: usize,
    pub gbp: GbpOptions,
    pub strategy: Strategy,
    pub seed: u64,
    /// A second strategy evaluated on the same states without affecting the
    /// trajectory; its picks are recorded for comparison.
    pub shadow: Option<Strategy>,
    /// Heavier dampings retried when a GBP run does not converge.
    pub fallback_damping: Vec<f64>,
    pub local_score: LocalScore,
}

impl Default for PursuitConfig {
    fn default() -> Self {
        PursuitConfig {
            max_width: 2,
            max_regions: 4,
            per_iteration: 1,
            max_loop_len: 4,
            gbp: GbpOptions::default(),
            strategy: Strategy::Rp,
            seed: 0,
            shadow: None,
            fallback_damping: vec![0.8, 0.95],
            local_score: LocalScore::default(),
        }
    }
}

impl PursuitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.per_iteration == 0 || (self.max_regions > 0 && self.per_iteration > self.max_regions) {
            return Err(Error::InvalidParameter(format!(
                "regions per iteration {} must be in 1..={}",
                self.per_iteration, self.max_regions
            )));
        }
        if self.max_width < 2 {
            return Err(Error::InvalidParameter(format!("max width {} must be >= 2", self.max_width)));
        }
        if self.max_loop_len < 3 {
            return Err(Error::InvalidParameter(format!(
                "max loop length {} must be >= 3",
                self.max_loop_len
            )));
        }
        if let Some(d) = self.fallback_damping.iter().find(|d| !(0.0..1.0).contains(*d)) {
            return Err(Error::InvalidParameter(format!("fallback damping {d} not in [0, 1)")));
        }
        self.gbp.validate()
    }
}

/// Candidate regions built from chordless cycles: each cycle's variables with all
/// factors among them, decomposed into weakly irreducible pieces, kept when their
/// width against the current direct subregions is at most `max_width`.
pub fn candidate_pool(fg: &FactorGraph, rg: &RegionGraph, config: &PursuitConfig) -> Result<Vec<Region>> {
    let cycles = enumerate_chordless_cycles(fg, config.max_loop_len);
    candidate_pool_from_cycles(fg, rg, &cycles, config.max_width)
}

pub fn candidate_pool_from_cycles(
    fg: &FactorGraph,
    rg: &RegionGraph,
    cycles: &[Vec<VarId>],
    max_width: usize,
) -> Result<Vec<Region>> {
    let mut pool = Vec::new();
    for cycle in cycles {
        let region = loop_region(fg, cycle)?;
        for piece in decompose_weakly_irreducible(&region, fg) {
            // already present, or already covered by a bigger region
            if rg.regions().iter().any(|r| r.contains(&piece)) {
                continue;
            }
            let scopes: Vec<Vec<VarId>> = rg
                .direct_subregions(&piece)?
                .into_iter()
                .map(|c| rg.region(c).vars.clone())
                .collect();
            if region_width(&piece, &scopes, fg).width <= max_width {
                pool.push(piece);
            }
        }
    }
    pool.sort_by(|a, b| (&a.vars, &a.factors).cmp(&(&b.vars, &b.factors)));
    pool.dedup();
    Ok(pool)
}

/// The cycle's variables with every factor among them that couples two or more
/// variables. Single-variable factors stay in their base regions.
pub fn loop_region(fg: &FactorGraph, vars: &[VarId]) -> Result<Region> {
    let mut sorted = vars.to_vec();
    sorted.sort_unstable();
    let factors = fg
        .factors_within(&sorted)
        .into_iter()
        .filter(|&f| fg.factor(f).scope.len() > 1)
        .collect();
    Region::new(sorted, factors)
}

/// Indices of the `k` pool entries a strategy picks. Entries scored `None` are
/// skipped; ties go to the earlier (canonically smaller) entry.
pub fn select_regions(
    pool: &[Region],
    scores: &[Option<f64>],
    strategy: Strategy,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    if pool.len() != scores.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} candidates but {} scores",
            pool.len(),
            scores.len()
        )));
    }
    let mut valid: Vec<(usize, f64)> = scores
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.filter(|v| !v.is_nan()).map(|v| (i, v)))
        .collect();
    if valid.is_empty() {
        return Err(Error::EmptyPool);
    }
    let k = k.min(valid.len());
    if strategy == Strategy::Rand {
        let picks = sample(rng, valid.len(), k);
        return Ok(picks.into_iter().map(|p| valid[p].0).collect());
    }
    if strategy.prefers_small() {
        valid.sort_by(|a, b| a.1.total_cmp(&b.1));
    } else {
        valid.sort_by(|a, b| b.1.total_cmp(&a.1));
    }
    Ok(valid.into_iter().take(k).map(|(i, _)| i).collect())
}

/// Scores every pool entry for `strategy` against one snapshot, in parallel.
pub fn score_candidates(
    snapshot: &Snapshot<'_>,
    pool: &[Region],
    strategy: Strategy,
    opts: &GbpOptions,
    exact: Option<&ExactResult>,
) -> Result<Vec<Score>> {
    if strategy == Strategy::Opt && exact.is_none() {
        return Err(Error::OracleInfeasible("OPT needs exact marginals".into()));
    }
    pool.par_iter()
        .map(|c| match strategy {
            Strategy::Rp | Strategy::RpMinus => snapshot.local_delta_f(c, opts),
            Strategy::RpPlus => snapshot.full_delta_f(c, opts),
            Strategy::Opt => snapshot.l1_after(c, opts, exact.expect("checked above")),
            Strategy::Rand => Ok(Score {
                value: 0.0,
                valid: true,
                iterations: 0,
            }),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PursuitRecord {
    pub iteration: usize,
    /// `BASE` on the baseline row, the strategy name afterwards.
    pub strategy: String,
    pub chosen: Vec<Region>,
    pub chosen_scores: Vec<f64>,
    pub free_energy: f64,
    pub l1_error: Option<f64>,
    pub gbp_iters: usize,
    pub converged: bool,
    pub candidate_scores: Vec<(Region, Option<f64>)>,
    pub shadow_choice: Option<Vec<Region>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PursuitTrace {
    pub strategy: Strategy,
    pub records: Vec<PursuitRecord>,
    /// The final region graph.
    pub region_graph: RegionGraph,
}

pub const BASELINE_LABEL: &str = "BASE";

fn region_label(r: &Region) -> String {
    r.vars.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

impl PursuitTrace {
    /// CSV with columns `iteration,strategy,chosen_region,score,free_energy,l1_error,gbp_iters,converged`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_records(&self.records, out)
    }

    /// Regions chosen after the baseline, in order.
    pub fn chosen(&self) -> Vec<&Region> {
        self.records.iter().flat_map(|r| &r.chosen).collect()
    }
}

pub fn write_records<W: Write>(records: &[PursuitRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "iteration",
        "strategy",
        "chosen_region",
        "score",
        "free_energy",
        "l1_error",
        "gbp_iters",
        "converged",
    ])?;
    for r in records {
        let chosen = r.chosen.iter().map(region_label).collect::<Vec<_>>().join(";");
        let score = r.chosen_scores.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";");
        w.write_record([
            r.iteration.to_string(),
            r.strategy.clone(),
            chosen,
            score,
            r.free_energy.to_string(),
            r.l1_error.map(|e| e.to_string()).unwrap_or_default(),
            r.gbp_iters.to_string(),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-iteration means of several traces of one strategy (the RAND summary).
/// The baseline row is copied from the first trace; chosen regions are left empty.
pub fn average_traces(traces: &[PursuitTrace]) -> Vec<PursuitRecord> {
    let Some(first) = traces.first() else {
        return Vec::new();
    };
    let len = traces.iter().map(|t| t.records.len()).min().unwrap_or(0);
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        if i == 0 {
            out.push(first.records[0].clone());
            continue;
        }
        let rows: Vec<&PursuitRecord> = traces.iter().map(|t| &t.records[i]).collect();
        let n = rows.len() as f64;
        let l1 = rows
            .iter()
            .map(|r| r.l1_error)
            .collect::<Option<Vec<f64>>>()
            .map(|v| v.iter().sum::<f64>() / n);
        out.push(PursuitRecord {
            iteration: i,
            strategy: first.records[i].strategy.clone(),
            chosen: Vec::new(),
            chosen_scores: Vec::new(),
            free_energy: rows.iter().map(|r| r.free_energy).sum::<f64>() / n,
            l1_error: l1,
            gbp_iters: (rows.iter().map(|r| r.gbp_iters).sum::<usize>() as f64 / n).round() as usize,
            converged: rows.iter().all(|r| r.converged),
            candidate_scores: Vec::new(),
            shadow_choice: None,
        });
    }
    out
}

fn summarize(rg: &RegionGraph, fg: &FactorGraph, run: &GbpRun, exact: Option<&ExactResult>) -> Result<(f64, Option<f64>)> {
    let f = rg_free_energy(rg, fg, &run.beliefs)?;
    let l1 = match exact {
        Some(e) => Some(avg_l1_error(&node_marginals(rg, fg, &run.beliefs)?, e)?),
        None => None,
    };
    Ok((f, l1))
}

/// Runs region pursuit from the Bethe region graph until `max_regions` regions
/// have been added or no usable candidate remains.
///
/// A pick whose full re-run stops converging is rolled back and the next
/// candidate in rank order is tried instead; it stays eligible in later iterations.
pub fn region_pursuit(fg: &FactorGraph, config: &PursuitConfig, exact: Option<&ExactResult>) -> Result<PursuitTrace> {
    config.validate()?;
    let needs_oracle = config.strategy == Strategy::Opt || config.shadow == Some(Strategy::Opt);
    if needs_oracle && exact.is_none() {
        return Err(Error::OracleInfeasible("OPT needs exact marginals".into()));
    }
    let mut rg = RegionGraph::bethe(fg);
    let ext = rg.is_extendable(fg);
    if !ext.extendable {
        return Err(Error::NotExtendable(format!("base region graph: {:?}", ext.witness)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut shadow_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let fallback = config.fallback_damping.as_slice();
    let mut run = GbpEngine::new(&rg, fg)?.run_with_fallback(&config.gbp, None, None, fallback)?;
    let (f, l1) = summarize(&rg, fg, &run, exact)?;
    let mut records = vec![PursuitRecord {
        iteration: 0,
        strategy: BASELINE_LABEL.to_string(),
        chosen: Vec::new(),
        chosen_scores: Vec::new(),
        free_energy: f,
        l1_error: l1,
        gbp_iters: run.state.iteration,
        converged: run.state.converged,
        candidate_scores: Vec::new(),
        shadow_choice: None,
    }];

    let cycles = enumerate_chordless_cycles(fg, config.max_loop_len);
    let mut added = 0;
    while added < config.max_regions {
        let pool = candidate_pool_from_cycles(fg, &rg, &cycles, config.max_width)?;
        if pool.is_empty() {
            break;
        }
        let snapshot = Snapshot {
            rg: &rg,
            fg,
            state: &run.state,
            beliefs: &run.beliefs,
            fallback_damping: fallback,
            local_score: config.local_score,
        };
        let k = config.per_iteration.min(config.max_regions - added);
        let scores = score_candidates(&snapshot, &pool, config.strategy, &config.gbp, exact)?;
        let usable: Vec<Option<f64>> = scores.iter().map(Score::usable).collect();
        // full ranking, so a rejected pick can fall through to the next one
        let ranking = match select_regions(&pool, &usable, config.strategy, pool.len(), &mut rng) {
            Ok(p) => p,
            Err(Error::EmptyPool) => break,
            Err(e) => return Err(e),
        };
        let shadow_choice = match config.shadow {
            Some(s) if s != config.strategy => {
                let sc = score_candidates(&snapshot, &pool, s, &config.gbp, exact)?;
                let su: Vec<Option<f64>> = sc.iter().map(Score::usable).collect();
                select_regions(&pool, &su, s, k, &mut shadow_rng)
                    .ok()
                    .map(|p| p.into_iter().map(|i| pool[i].clone()).collect())
            }
            Some(_) => Some(ranking.iter().take(k).map(|&i| pool[i].clone()).collect()),
            None => None,
        };

        let mut chosen = Vec::new();
        let mut chosen_scores = Vec::new();
        for &i in &ranking {
            if chosen.len() == k {
                break;
            }
            if rg.regions().iter().any(|r| r.contains(&pool[i])) {
                continue;
            }
            let mut next = rg.clone();
            next.add_outer_region(pool[i].clone(), fg)?;
            let report = next.check_validity(fg);
            if !report.is_valid() {
                return Err(Error::Precondition(format!(
                    "region graph invalid after adding {}: {:?}",
                    pool[i], report.violations
                )));
            }
            let next_run = GbpEngine::new(&next, fg)?.run_with_fallback(&config.gbp, Some(&run.state), None, fallback)?;
            if run.state.converged && !next_run.state.converged {
                continue;
            }
            rg = next;
            run = next_run;
            chosen.push(pool[i].clone());
            chosen_scores.push(scores[i].value);
        }
        if chosen.is_empty() {
            break;
        }
        added += chosen.len();
        let (f, l1) = summarize(&rg, fg, &run, exact)?;
        records.push(PursuitRecord {
            iteration: records.len(),
            strategy: config.strategy.name().to_string(),
            chosen,
            chosen_scores,
            free_energy: f,
            l1_error: l1,
            gbp_iters: run.state.iteration,
            converged: run.state.converged,
            candidate_scores: pool.into_iter().zip(usable).collect(),
            shadow_choice,
        });
    }
    Ok(PursuitTrace {
        strategy: config.strategy,
        records,
        region_graph: rg,
    })
}

#[cfg(test)]
mod tests;
