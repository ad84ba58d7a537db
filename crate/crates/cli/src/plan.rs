use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nelson_core::learn::TrainConfig;
use nelson_core::problems::DEFAULT_EDGE_PROB;
use nelson_core::{SamplerConfig, SamplerKind};
use serde::Serialize;

use crate::error::CliError;

/// Clause width for `gen --family ksat` when `--k` is absent.
pub const DEFAULT_KSAT_K: usize = 5;
/// Sampler draws behind the gradient-error and validity entries of `eval`.
pub const DEFAULT_GRAD_M: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Ksat,
    Sinkfree,
    Routes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OracleWhat {
    Dist,
    Grad,
    Resamples,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenPlan {
    pub family: Family,
    pub size: usize,
    /// Clause width; `ksat` only.
    pub k: Option<usize>,
    /// `sinkfree` only.
    pub edge_prob: Option<f64>,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplePlan {
    pub cnf: PathBuf,
    pub groups: Option<PathBuf>,
    pub theta: PathBuf,
    pub sampler: SamplerKind,
    pub config: SamplerConfig,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainPlan {
    pub cnf: PathBuf,
    pub groups: Option<PathBuf>,
    pub data: PathBuf,
    /// Starting point; zero when absent.
    pub theta: Option<PathBuf>,
    pub config: TrainConfig,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalPlan {
    pub cnf: PathBuf,
    pub groups: Option<PathBuf>,
    pub theta: PathBuf,
    pub preferred: PathBuf,
    pub unseen: PathBuf,
    pub grad_m: usize,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OraclePlan {
    pub cnf: PathBuf,
    pub groups: Option<PathBuf>,
    pub theta: PathBuf,
    pub what: OracleWhat,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunPlan {
    Gen(GenPlan),
    Sample(SamplePlan),
    Train(TrainPlan),
    Eval(EvalPlan),
    Oracle(OraclePlan),
}

impl RunPlan {
    pub fn command(&self) -> &'static str {
        match self {
            Self::Gen(_) => "gen",
            Self::Sample(_) => "sample",
            Self::Train(_) => "train",
            Self::Eval(_) => "eval",
            Self::Oracle(_) => "oracle",
        }
    }

    /// Oracle runs use no randomness and report seed 0.
    pub fn seed(&self) -> u64 {
        match self {
            Self::Gen(p) => p.seed,
            Self::Sample(p) => p.config.seed,
            Self::Train(p) => p.config.seed,
            Self::Eval(p) => p.seed,
            Self::Oracle(_) => 0,
        }
    }

    pub fn out_dir(&self) -> &std::path::Path {
        match self {
            Self::Gen(p) => &p.out,
            Self::Sample(p) => &p.out,
            Self::Train(p) => &p.out,
            Self::Eval(p) => &p.out,
            Self::Oracle(p) => &p.out,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "nelson", version, about = "Constrained MRF sampling, learning and exact oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a benchmark instance.
    Gen(GenArgs),
    /// Draw a batch of assignments.
    Sample(SampleArgs),
    /// Contrastive-divergence training on a dataset of preferred assignments.
    Train(TrainArgs),
    /// Validity, MAP@10, gradient error and NLL for a model.
    Eval(EvalArgs),
    /// Exact quantities by enumeration.
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
struct Instance {
    /// DIMACS CNF file.
    #[arg(long)]
    cnf: PathBuf,
    /// Sidecar JSON with exactly-one groups.
    #[arg(long)]
    groups: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Variables (ksat), vertices (sinkfree) or cities (routes).
    #[arg(long)]
    size: usize,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    edge_prob: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    instance: Instance,
    #[arg(long)]
    theta: PathBuf,
    #[arg(long, value_parser = parse_sampler)]
    sampler: SamplerKind,
    /// Batch size.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    tryout: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    /// Keep the per-round violated sets in `records.json`.
    #[arg(long)]
    record: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    cnf: Option<PathBuf>,
    #[arg(long)]
    groups: Option<PathBuf>,
    /// Preferred assignments, one bitstring per line.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Initial parameters; zero when absent.
    #[arg(long)]
    theta: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, value_parser = parse_sampler)]
    sampler: Option<SamplerKind>,
    #[arg(long)]
    tryout: Option<usize>,
    /// Exact NLL every this many iterations.
    #[arg(long)]
    trace_every: Option<usize>,
    /// Fill the wall_ms trace column (makes the trace non-reproducible).
    #[arg(long)]
    wall_clock: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    instance: Instance,
    #[arg(long)]
    theta: PathBuf,
    #[arg(long)]
    preferred: PathBuf,
    #[arg(long)]
    unseen: PathBuf,
    #[arg(long, default_value_t = DEFAULT_GRAD_M)]
    grad_m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    instance: Instance,
    #[arg(long)]
    theta: PathBuf,
    #[arg(long, value_enum)]
    what: OracleWhat,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn parse_sampler(s: &str) -> Result<SamplerKind, String> {
    s.parse().map_err(|e: nelson_core::Error| e.to_string())
}

/// Parses an argument list (without the program name) into a resolved plan.
/// Input files are not touched here; missing files surface from
/// [`execute_plan`](crate::execute_plan) as I/O errors.
pub fn build_plan<I, S>(argv: I) -> Result<RunPlan, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = std::iter::once(std::ffi::OsString::from("nelson"))
        .chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(args)?;
    match cli.command {
        Command::Gen(a) => gen_plan(a),
        Command::Sample(a) => sample_plan(a),
        Command::Train(a) => train_plan(a),
        Command::Eval(a) => eval_plan(a),
        Command::Oracle(a) => Ok(RunPlan::Oracle(OraclePlan {
            cnf: a.instance.cnf,
            groups: a.instance.groups,
            theta: a.theta,
            what: a.what,
            out: a.out,
        })),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn gen_plan(a: GenArgs) -> Result<RunPlan, CliError> {
    if a.k.is_some() && a.family != Family::Ksat {
        return Err(usage("--k applies only to --family ksat"));
    }
    if a.edge_prob.is_some() && a.family != Family::Sinkfree {
        return Err(usage("--edge-prob applies only to --family sinkfree"));
    }
    let (k, edge_prob) = match a.family {
        Family::Ksat => (Some(a.k.unwrap_or(DEFAULT_KSAT_K)), None),
        Family::Sinkfree => (None, Some(a.edge_prob.unwrap_or(DEFAULT_EDGE_PROB))),
        Family::Routes => (None, None),
    };
    if let Some(p) = edge_prob {
        if !(0.0..=1.0).contains(&p) {
            return Err(usage("--edge-prob must lie in [0, 1]"));
        }
    }
    Ok(RunPlan::Gen(GenPlan {
        family: a.family,
        size: a.size,
        k,
        edge_prob,
        seed: a.seed,
        out: a.out,
    }))
}

fn sample_plan(a: SampleArgs) -> Result<RunPlan, CliError> {
    if a.sampler != SamplerKind::Gibbs && (a.burn_in.is_some() || a.thin.is_some()) {
        return Err(usage("--burn-in and --thin require --sampler gibbs"));
    }
    let defaults = SamplerConfig::default();
    let config = SamplerConfig {
        t_tryout: a.tryout.unwrap_or(defaults.t_tryout),
        batch_size: a.n,
        seed: a.seed,
        record: a.record,
        gibbs_burn_in: a.burn_in.unwrap_or(defaults.gibbs_burn_in),
        gibbs_thinning: a.thin.unwrap_or(defaults.gibbs_thinning),
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    if config.gibbs_thinning == 0 {
        return Err(usage("--thin must be at least 1"));
    }
    Ok(RunPlan::Sample(SamplePlan {
        cnf: a.instance.cnf,
        groups: a.instance.groups,
        theta: a.theta,
        sampler: a.sampler,
        config,
        out: a.out,
    }))
}

fn train_plan(a: TrainArgs) -> Result<RunPlan, CliError> {
    // checked by hand so that a bare `train` reports the dataset first
    let data = a.data.ok_or_else(|| usage("missing --data"))?;
    let cnf = a.cnf.ok_or_else(|| usage("missing --cnf"))?;
    let d = TrainConfig::default();
    let config = TrainConfig {
        m: a.m.unwrap_or(d.m),
        eta: a.eta.unwrap_or(d.eta),
        t_max: a.iters.unwrap_or(d.t_max),
        sampler: a.sampler.unwrap_or(d.sampler),
        seed: a.seed,
        t_tryout: a.tryout.unwrap_or(d.t_tryout),
        trace_every: a.trace_every.unwrap_or(d.trace_every),
        record_wall_clock: a.wall_clock,
        ..d
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(RunPlan::Train(TrainPlan {
        cnf,
        groups: a.groups,
        data,
        theta: a.theta,
        config,
        out: a.out,
    }))
}

fn eval_plan(a: EvalArgs) -> Result<RunPlan, CliError> {
    if a.grad_m == 0 {
        return Err(usage("--grad-m must be at least 1"));
    }
    Ok(RunPlan::Eval(EvalPlan {
        cnf: a.instance.cnf,
        groups: a.instance.groups,
        theta: a.theta,
        preferred: a.preferred,
        unseen: a.unseen,
        grad_m: a.grad_m,
        seed: a.seed,
        out: a.out,
    }))
}
