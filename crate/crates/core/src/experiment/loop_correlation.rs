//! Bethe free-energy error vs marginal error on single-loop models.

use std::io::Write;

use crate::error::{Error, Result};
use crate::exact::{avg_l1_error, exact_brute_force, exact_entropy_brute_force};
use crate::factor_graph::gen_loop;
use crate::gbp::{node_marginals, rg_entropy, rg_free_energy, GbpEngine, GbpOptions};
use crate::region_graph::RegionGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct LoopTrial {
    pub trial: usize,
    pub w_std: f64,
    pub msg_std: f64,
    pub exact_free_energy: f64,
    pub bethe_free_energy: f64,
    pub exact_entropy: f64,
    pub bethe_entropy: f64,
    pub l1_error: f64,
    pub converged: bool,
    pub marginals: Vec<Vec<f64>>,
}

impl LoopTrial {
    pub fn free_energy_error(&self) -> f64 {
        (self.bethe_free_energy - self.exact_free_energy).abs()
    }

    pub fn entropy_error(&self) -> f64 {
        (self.bethe_entropy - self.exact_entropy).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopCorrelation {
    pub trials: Vec<LoopTrial>,
    /// Pearson correlation of |F error| with L1 error; NaN when undefined.
    pub free_energy_corr: f64,
    /// Pearson correlation of |entropy error| with L1 error; NaN when undefined.
    pub entropy_corr: f64,
}

/// Sample Pearson correlation; NaN for fewer than two points or zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return f64::NAN;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (dx, dy) = (x[i] - mx, y[i] - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return f64::NAN;
    }
    sxy / (sxx * syy).sqrt()
}

fn sweep(range: (f64, f64), k: usize, trials: usize) -> f64 {
    if trials <= 1 {
        return range.0;
    }
    range.0 + (range.1 - range.0) * k as f64 / (trials - 1) as f64
}

/// One loop model per trial with stds swept linearly across the ranges; trial
/// `k` uses model seed `seed + k`.
pub fn cmd_loop_correlation<W: Write>(
    n: usize,
    w_std: (f64, f64),
    msg_std: (f64, f64),
    trials: usize,
    seed: u64,
    out: Option<W>,
) -> Result<LoopCorrelation> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let opts = GbpOptions::default();
    let mut rows = Vec::with_capacity(trials);
    for k in 0..trials {
        let (ws, ms) = (sweep(w_std, k, trials), sweep(msg_std, k, trials));
        let fg = gen_loop(n, ws, ms, seed.wrapping_add(k as u64))?;
        let exact = exact_brute_force(&fg)?;
        let rg = RegionGraph::bethe(&fg);
        let run = GbpEngine::new(&rg, &fg)?.run(&opts, None)?;
        let marginals = node_marginals(&rg, &fg, &run.beliefs)?;
        rows.push(LoopTrial {
            trial: k,
            w_std: ws,
            msg_std: ms,
            exact_free_energy: -exact.log_partition,
            bethe_free_energy: rg_free_energy(&rg, &fg, &run.beliefs)?,
            exact_entropy: exact_entropy_brute_force(&fg)?,
            bethe_entropy: rg_entropy(&rg, &run.beliefs),
            l1_error: avg_l1_error(&marginals, &exact)?,
            converged: run.state.converged,
            marginals,
        });
    }
    let l1: Vec<f64> = rows.iter().map(|r| r.l1_error).collect();
    let fe: Vec<f64> = rows.iter().map(LoopTrial::free_energy_error).collect();
    let se: Vec<f64> = rows.iter().map(LoopTrial::entropy_error).collect();
    let result = LoopCorrelation {
        free_energy_corr: pearson(&fe, &l1),
        entropy_corr: pearson(&se, &l1),
        trials: rows,
    };
    if let Some(out) = out {
        write_csv(&result, out)?;
    }
    Ok(result)
}

/// Per-trial rows, then a `summary` row whose error columns hold the correlations.
pub fn write_csv<W: Write>(result: &LoopCorrelation, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "trial",
        "w_std",
        "msg_std",
        "exact_free_energy",
        "bethe_free_energy",
        "free_energy_error",
        "exact_entropy",
        "bethe_entropy",
        "entropy_error",
        "l1_error",
        "converged",
    ])?;
    for r in &result.trials {
        w.write_record([
            r.trial.to_string(),
            r.w_std.to_string(),
            r.msg_std.to_string(),
            r.exact_free_energy.to_string(),
            r.bethe_free_energy.to_string(),
            r.free_energy_error().to_string(),
            r.exact_entropy.to_string(),
            r.bethe_entropy.to_string(),
            r.entropy_error().to_string(),
            r.l1_error.to_string(),
            r.converged.to_string(),
        ])?;
    }
    let blank = String::new;
    w.write_record([
        "summary".to_string(),
        blank(),
        blank(),
        blank(),
        blank(),
        result.free_energy_corr.to_string(),
        blank(),
        blank(),
        result.entropy_corr.to_string(),
        blank(),
        blank(),
    ])?;
    w.flush()?;
    Ok(())
}
