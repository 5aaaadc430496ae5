//! File-level drivers behind the command-line tool. Every command reads and
//! writes plain files (UAI models, region-graph text, CSV) so runs can be
//! scripted and plotted externally.

mod loop_correlation;
mod script;

pub use loop_correlation::{cmd_loop_correlation, pearson, LoopCorrelation, LoopTrial};
pub use script::{apply_script, parse_script, TransformOp};

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::elimination::min_fill_order;
use crate::error::{Error, Result};
use crate::exact::{exact_inference, interaction_graph, ExactResult, ELIMINATION_WIDTH_CAP};
use crate::factor_graph::{generate, read_uai, write_uai, FactorGraph, GeneratorMeta, ModelFamily, GENERATOR_VERSION};
use crate::gbp::{node_marginals, rg_free_energy, GbpEngine, GbpOptions, GbpRun};
use crate::pursuit::{average_traces, region_pursuit, write_records, PursuitConfig, PursuitRecord, Strategy};
use crate::region_graph::{Extendability, RegionGraph, ValidityReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_ORACLE: i32 = 3;

/// Process exit code for a failed command.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::OracleInfeasible(_) => EXIT_ORACLE,
        _ => EXIT_VALIDATION,
    }
}

/// One pursuit experiment on one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub strategies: Vec<Strategy>,
    /// Number of independent RAND draws averaged into the RAND trace.
    pub rand_draws: usize,
    /// Report L1 error against the exact oracle.
    pub report_l1: bool,
    pub config: PursuitConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            strategies: vec![Strategy::Rp],
            rand_draws: 10,
            report_l1: true,
            config: PursuitConfig::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn needs_oracle(&self) -> bool {
        self.report_l1 || self.strategies.contains(&Strategy::Opt)
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() {
            return Err(Error::InvalidParameter("at least one strategy is required".into()));
        }
        if self.strategies.contains(&Strategy::Rand) && self.rand_draws == 0 {
            return Err(Error::InvalidParameter("RAND needs at least one draw".into()));
        }
        self.config.validate()
    }
}

/// Fails with `OracleInfeasible` when the min-fill induced width exceeds the
/// elimination cap.
pub fn check_oracle_feasible(fg: &FactorGraph) -> Result<usize> {
    let (_, width) = min_fill_order(&interaction_graph(fg));
    if width > ELIMINATION_WIDTH_CAP {
        return Err(Error::OracleInfeasible(format!(
            "min-fill induced width {width} exceeds {ELIMINATION_WIDTH_CAP}"
        )));
    }
    Ok(width)
}

fn oracle(fg: &FactorGraph) -> Result<ExactResult> {
    check_oracle_feasible(fg)?;
    exact_inference(fg).map_err(|e| match e {
        Error::WidthExceeded { .. } | Error::StateSpaceTooLarge(_) => Error::OracleInfeasible(e.to_string()),
        other => other,
    })
}

pub fn load_model(path: &Path) -> Result<FactorGraph> {
    read_uai(&fs::read_to_string(path)?)
}

/// Reads a region graph and rejects it unless it is valid for `fg`.
pub fn load_region_graph(path: &Path, fg: &FactorGraph) -> Result<RegionGraph> {
    let rg = RegionGraph::from_text(&fs::read_to_string(path)?)?;
    let report = rg.check_validity(fg);
    if !report.is_valid() {
        return Err(Error::InvalidRegionGraph(violation_text(&report)));
    }
    Ok(rg)
}

fn violation_text(report: &ValidityReport) -> String {
    report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// Sidecar path for a model file: `model.uai` -> `model.uai.json`.
pub fn meta_path(model_path: &Path) -> PathBuf {
    let mut name = model_path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Writes the model in UAI format plus a JSON metadata sidecar.
pub fn cmd_generate(family: &ModelFamily, seed: u64, out_path: &Path) -> Result<GeneratorMeta> {
    let fg = generate(family, seed)?;
    let meta = GeneratorMeta {
        model: family.clone(),
        seed,
        generator_version: GENERATOR_VERSION.to_string(),
        num_vars: fg.num_vars(),
        num_factors: fg.num_factors(),
    };
    if let Some(dir) = out_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(out_path, write_uai(&fg))?;
    let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(meta_path(out_path), json + "\n")?;
    Ok(meta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbpSummary {
    pub free_energy: f64,
    pub marginals: Vec<Vec<f64>>,
    pub converged: bool,
    pub iterations: usize,
    pub max_residual: f64,
}

/// Runs GBP on `rg` (Bethe when absent) and writes `beliefs.csv`,
/// `diagnostics.csv` and `summary.csv` into `out_dir`.
pub fn cmd_run_gbp(model_path: &Path, rg_path: Option<&Path>, opts: &GbpOptions, out_dir: &Path) -> Result<GbpSummary> {
    let fg = load_model(model_path)?;
    let rg = match rg_path {
        Some(p) => load_region_graph(p, &fg)?,
        None => RegionGraph::bethe(&fg),
    };
    let run: GbpRun = GbpEngine::new(&rg, &fg)?.run(opts, None)?;
    let summary = GbpSummary {
        free_energy: rg_free_energy(&rg, &fg, &run.beliefs)?,
        marginals: node_marginals(&rg, &fg, &run.beliefs)?,
        converged: run.state.converged,
        iterations: run.state.iteration,
        max_residual: run.state.max_residual,
    };

    fs::create_dir_all(out_dir)?;
    let mut w = csv::Writer::from_path(out_dir.join("beliefs.csv"))?;
    w.write_record(["variable", "state", "belief"])?;
    for (v, m) in summary.marginals.iter().enumerate() {
        for (x, p) in m.iter().enumerate() {
            w.write_record([v.to_string(), x.to_string(), p.to_string()])?;
        }
    }
    w.flush()?;
    run.diagnostics.write_csv(fs::File::create(out_dir.join("diagnostics.csv"))?)?;
    let mut w = csv::Writer::from_path(out_dir.join("summary.csv"))?;
    w.write_record(["regions", "free_energy", "converged", "iterations", "max_residual", "clamp_count"])?;
    w.write_record([
        rg.len().to_string(),
        summary.free_energy.to_string(),
        summary.converged.to_string(),
        summary.iterations.to_string(),
        summary.max_residual.to_string(),
        run.diagnostics.clamp_count.to_string(),
    ])?;
    w.flush()?;
    Ok(summary)
}

pub fn trace_path(out_dir: &Path, strategy: Strategy) -> PathBuf {
    out_dir.join(format!("trace_{}.csv", strategy.slug()))
}

/// Runs each strategy of `spec` on the model and writes one trace CSV per
/// strategy. RAND is the per-iteration mean over `rand_draws` seeds starting
/// at the configured seed.
pub fn cmd_pursue(model_path: &Path, spec: &ExperimentSpec, out_dir: &Path) -> Result<Vec<(Strategy, Vec<PursuitRecord>)>> {
    spec.validate()?;
    let fg = load_model(model_path)?;
    pursue_model(&fg, spec, out_dir)
}

pub fn pursue_model(fg: &FactorGraph, spec: &ExperimentSpec, out_dir: &Path) -> Result<Vec<(Strategy, Vec<PursuitRecord>)>> {
    spec.validate()?;
    let exact = if spec.needs_oracle() { Some(oracle(fg)?) } else { None };
    fs::create_dir_all(out_dir)?;
    let mut out = Vec::new();
    for &strategy in &spec.strategies {
        let records = if strategy == Strategy::Rand {
            let traces = (0..spec.rand_draws as u64)
                .map(|k| {
                    let config = PursuitConfig {
                        strategy,
                        seed: spec.config.seed.wrapping_add(k),
                        ..spec.config.clone()
                    };
                    region_pursuit(fg, &config, exact.as_ref())
                })
                .collect::<Result<Vec<_>>>()?;
            average_traces(&traces)
        } else {
            let config = PursuitConfig {
                strategy,
                ..spec.config.clone()
            };
            let trace = region_pursuit(fg, &config, exact.as_ref())?;
            fs::write(
                out_dir.join(format!("rg_{}.txt", strategy.slug())),
                trace.region_graph.to_text(),
            )?;
            trace.records
        };
        write_records(&records, fs::File::create(trace_path(out_dir, strategy))?)?;
        out.push((strategy, records));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub validity: ValidityReport,
    pub extendability: Extendability,
    pub counting_numbers: Vec<i64>,
}

impl CheckReport {
    pub fn render(&self) -> String {
        let mut s = format!(
            "valid: {}\nC1: {}\nC2: {}\nextendable: {}\n",
            self.validity.is_valid(),
            ok(self.validity.c1_ok),
            ok(self.validity.c2_ok),
            self.extendability.extendable
        );
        for v in &self.validity.violations {
            s.push_str(&format!("violation: {v}\n"));
        }
        if let Some((item, leaves)) = &self.extendability.witness {
            s.push_str(&format!("witness: {item} has {leaves} leaves\n"));
        }
        s
    }
}

fn ok(flag: bool) -> &'static str {
    if flag {
        "ok"
    } else {
        "violated"
    }
}

/// Validity and extendability of a region-graph file against a model.
pub fn cmd_check(model_path: &Path, rg_path: &Path) -> Result<CheckReport> {
    let fg = load_model(model_path)?;
    let rg = RegionGraph::from_text(&fs::read_to_string(rg_path)?)?;
    Ok(CheckReport {
        validity: rg.check_validity(&fg),
        extendability: rg.is_extendable(&fg),
        counting_numbers: rg.counting_numbers().to_vec(),
    })
}

/// Applies a transform script to a region-graph file and writes the result.
pub fn cmd_transform(model_path: &Path, rg_path: &Path, script_path: &Path, out_path: &Path) -> Result<RegionGraph> {
    let fg = load_model(model_path)?;
    let rg = load_region_graph(rg_path, &fg)?;
    let ops = parse_script(&fs::read_to_string(script_path)?)?;
    let out = apply_script(&rg, &fg, &ops)?;
    if let Some(dir) = out_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(out_path, out.to_text())?;
    Ok(out)
}
