use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use region_pursuit::experiment::{self, ExperimentSpec, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION};
use region_pursuit::factor_graph::{ModelFamily, WeightParams};
use region_pursuit::gbp::{GbpOptions, Schedule};
use region_pursuit::pursuit::{LocalScore, PursuitConfig, Strategy};
use region_pursuit::Result;

#[derive(Parser)]
#[command(name = "region-pursuit", version, about = "Region-graph GBP and region pursuit experiments")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded model as UAI plus a JSON sidecar.
    Generate(GenerateArgs),
    /// Run GBP on a model (Bethe region graph unless --rg is given).
    RunGbp(RunGbpArgs),
    /// Run region pursuit with one or more strategies.
    Pursue(PursueArgs),
    /// Bethe free-energy error vs marginal error on random loops.
    LoopCorrelation(LoopArgs),
    /// Apply a transform script to a region graph.
    Transform(TransformArgs),
    /// Report validity and extendability of a region graph.
    Check(CheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Grid,
    Fc,
    Loop,
    Tree,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    n: usize,
    /// Grid width; defaults to `n`.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    w_max: f64,
    #[arg(long, default_value_t = 0.5)]
    a_max: f64,
    #[arg(long, default_value_t = 1.0)]
    w_std: f64,
    #[arg(long, default_value_t = 0.5)]
    msg_std: f64,
    #[arg(long)]
    cluster_boost: bool,
    /// Output path; defaults to `<out-dir>/model.uai`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    TopDown,
    Random,
}

#[derive(Args)]
struct GbpArgs {
    #[arg(long, default_value_t = 0.5)]
    damping: f64,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
    #[arg(long, value_enum, default_value = "top-down")]
    schedule: ScheduleArg,
    #[arg(long)]
    random_init: bool,
}

impl GbpArgs {
    fn options(&self, seed: u64) -> GbpOptions {
        GbpOptions {
            damping: self.damping,
            tolerance: self.tolerance,
            max_iters: self.max_iters,
            schedule: match self.schedule {
                ScheduleArg::TopDown => Schedule::TopDownRoundRobin,
                ScheduleArg::Random => Schedule::RandomPermutation,
            },
            seed,
            random_init: self.random_init,
        }
    }
}

#[derive(Args)]
struct RunGbpArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    rg: Option<PathBuf>,
    #[command(flatten)]
    gbp: GbpArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum LocalScoreArg {
    CountingChange,
    FrozenDifference,
}

#[derive(Args)]
struct PursueArgs {
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated: OPT, RP, RP+, RP-, RAND.
    #[arg(long, value_delimiter = ',', default_value = "RP", value_parser = parse_strategy)]
    strategies: Vec<Strategy>,
    #[arg(long, default_value_t = 2)]
    max_width: usize,
    #[arg(long, default_value_t = 4)]
    max_regions: usize,
    #[arg(long, default_value_t = 1)]
    per_iteration: usize,
    #[arg(long, default_value_t = 4)]
    max_loop_len: usize,
    #[arg(long, default_value_t = 10)]
    rand_draws: usize,
    /// Record this strategy's picks alongside each step.
    #[arg(long, value_parser = parse_strategy)]
    shadow: Option<Strategy>,
    /// Skip the exact oracle and leave L1 columns empty.
    #[arg(long)]
    no_l1: bool,
    /// How RP and RP- read the local free-energy change.
    #[arg(long, value_enum, default_value = "counting-change")]
    local_score: LocalScoreArg,
    #[command(flatten)]
    gbp: GbpArgs,
}

fn parse_strategy(s: &str) -> std::result::Result<Strategy, String> {
    s.parse().map_err(|e: region_pursuit::Error| e.to_string())
}

#[derive(Args)]
struct LoopArgs {
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0.0)]
    w_std_min: f64,
    #[arg(long, default_value_t = 5.0)]
    w_std_max: f64,
    #[arg(long, default_value_t = 0.5)]
    msg_std_min: f64,
    #[arg(long, default_value_t = 0.5)]
    msg_std_max: f64,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    rg: PathBuf,
    #[arg(long)]
    script: PathBuf,
    /// Output path; defaults to `<out-dir>/transformed.rg`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    rg: PathBuf,
}

fn run(cli: Cli) -> Result<i32> {
    let seed = cli.seed;
    match cli.command {
        Command::Generate(a) => {
            let weights = WeightParams {
                w_max: a.w_max,
                a_max: a.a_max,
                cluster_boost: a.cluster_boost,
            };
            let family = match a.family {
                Family::Grid => ModelFamily::Grid {
                    n: a.n,
                    m: a.m.unwrap_or(a.n),
                    weights,
                },
                Family::Fc => ModelFamily::FullyConnected { n: a.n, weights },
                Family::Loop => ModelFamily::Loop {
                    n: a.n,
                    w_std: a.w_std,
                    msg_std: a.msg_std,
                },
                Family::Tree => ModelFamily::Tree {
                    n: a.n,
                    w_max: a.w_max,
                    a_max: a.a_max,
                },
            };
            let out = a.out.unwrap_or_else(|| cli.out_dir.join("model.uai"));
            let meta = experiment::cmd_generate(&family, seed, &out)?;
            println!("wrote {} ({} variables, {} factors)", out.display(), meta.num_vars, meta.num_factors);
        }
        Command::RunGbp(a) => {
            let s = experiment::cmd_run_gbp(&a.model, a.rg.as_deref(), &a.gbp.options(seed), &cli.out_dir)?;
            println!(
                "free_energy {} converged {} iterations {} max_residual {:e}",
                s.free_energy, s.converged, s.iterations, s.max_residual
            );
        }
        Command::Pursue(a) => {
            let spec = ExperimentSpec {
                strategies: a.strategies,
                rand_draws: a.rand_draws,
                report_l1: !a.no_l1,
                config: PursuitConfig {
                    max_width: a.max_width,
                    max_regions: a.max_regions,
                    per_iteration: a.per_iteration,
                    max_loop_len: a.max_loop_len,
                    gbp: a.gbp.options(seed),
                    seed,
                    shadow: a.shadow,
                    local_score: match a.local_score {
                        LocalScoreArg::CountingChange => LocalScore::CountingChange,
                        LocalScoreArg::FrozenDifference => LocalScore::FrozenDifference,
                    },
                    ..PursuitConfig::default()
                },
            };
            for (strategy, records) in experiment::cmd_pursue(&a.model, &spec, &cli.out_dir)? {
                let last = records.last().expect("baseline row");
                let l1 = last.l1_error.map(|e| e.to_string()).unwrap_or_else(|| "-".into());
                println!(
                    "{strategy}: {} regions added, free_energy {}, l1 {l1} -> {}",
                    records.len() - 1,
                    last.free_energy,
                    experiment::trace_path(&cli.out_dir, strategy).display()
                );
            }
        }
        Command::LoopCorrelation(a) => {
            fs::create_dir_all(&cli.out_dir)?;
            let path = cli.out_dir.join("loop_correlation.csv");
            let res = experiment::cmd_loop_correlation(
                a.n,
                (a.w_std_min, a.w_std_max),
                (a.msg_std_min, a.msg_std_max),
                a.trials,
                seed,
                Some(fs::File::create(&path)?),
            )?;
            println!(
                "free-energy corr {} entropy corr {} -> {}",
                res.free_energy_corr,
                res.entropy_corr,
                path.display()
            );
        }
        Command::Transform(a) => {
            let out = a.out.unwrap_or_else(|| cli.out_dir.join("transformed.rg"));
            let rg = experiment::cmd_transform(&a.model, &a.rg, &a.script, &out)?;
            println!("wrote {} ({} regions)", out.display(), rg.len());
        }
        Command::Check(a) => {
            let report = experiment::cmd_check(&a.model, &a.rg)?;
            print!("{}", report.render());
            if !report.validity.is_valid() {
                return Ok(EXIT_VALIDATION);
            }
        }
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { EXIT_OK as u8 });
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            experiment::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
