use std::fs;
use std::path::{Path, PathBuf};

use nelson_core::assignment::parse_rows;
use nelson_core::cnf::{emit_dimacs, Sidecar};
use nelson_core::learn::{neg_log_likelihood, train, Dataset, TrainConfig};
use nelson_core::metrics::{grad_error, map_at_10, validity, MetricReport};
use nelson_core::oracle::{
    exact_distribution, exact_grad_log_partition, expected_resamples, DEFAULT_ENUMERATION_CAP,
};
use nelson_core::problems::{gen_ksat, gen_routes, gen_sinkfree, ProblemInstance};
use nelson_core::{nelson_sample, parse_dimacs, ConstraintSet, ModelParams, SamplerConfig, SamplerKind};
use serde::Serialize;
use serde_json::json;

use crate::error::{input_err, io_err, CliError};
use crate::plan::{EvalPlan, Family, GenPlan, OraclePlan, OracleWhat, RunPlan, SamplePlan, TrainPlan};
use crate::plan::{DEFAULT_GRAD_M, DEFAULT_KSAT_K};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Files written by a successful run, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub files: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    plan: &'a RunPlan,
    defaults: serde_json::Value,
    outputs: &'a [String],
}

struct Writer {
    dir: PathBuf,
    files: Vec<String>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn put(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(io_err(&path))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn finish(mut self, plan: &RunPlan) -> Result<Outcome, CliError> {
        let mut outputs = self.files.clone();
        outputs.push(MANIFEST_FILE.to_string());
        let manifest = Manifest {
            tool: "nelson",
            version: env!("CARGO_PKG_VERSION"),
            command: plan.command(),
            seed: plan.seed(),
            plan,
            defaults: defaults(),
            outputs: &outputs,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        self.put(MANIFEST_FILE, &text)?;
        Ok(Outcome { files: self.files })
    }
}

fn defaults() -> serde_json::Value {
    let s = SamplerConfig::default();
    let t = TrainConfig::default();
    json!({
        "t_tryout": s.t_tryout,
        "m": t.m,
        "eta": t.eta,
        "t_max": t.t_max,
        "train_sampler": t.sampler,
        "train_gibbs_burn_in": t.gibbs_burn_in,
        "train_gibbs_thinning": t.gibbs_thinning,
        "retry_batches": t.retry_batches,
        "gibbs_burn_in": s.gibbs_burn_in,
        "gibbs_thinning": s.gibbs_thinning,
        "edge_prob": nelson_core::problems::DEFAULT_EDGE_PROB,
        "ksat_k": DEFAULT_KSAT_K,
        "grad_m": DEFAULT_GRAD_M,
        "enumeration_cap": DEFAULT_ENUMERATION_CAP,
        "seed": 0,
    })
}

/// Runs a plan. On sampler exhaustion during `sample` the outputs are still
/// written before the error is returned.
pub fn execute_plan(plan: &RunPlan) -> Result<Outcome, CliError> {
    match plan {
        RunPlan::Gen(p) => run_gen(plan, p),
        RunPlan::Sample(p) => run_sample(plan, p),
        RunPlan::Train(p) => run_train(plan, p),
        RunPlan::Eval(p) => run_eval(plan, p),
        RunPlan::Oracle(p) => run_oracle(plan, p),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn load_constraints(cnf: &Path, groups: Option<&Path>) -> Result<ConstraintSet, CliError> {
    let mut cs = parse_dimacs(&read(cnf)?).map_err(input_err(cnf))?;
    if let Some(g) = groups {
        let sidecar = Sidecar::from_json(&read(g)?).map_err(input_err(g))?;
        cs.merge_sidecar(&sidecar).map_err(input_err(g))?;
    }
    Ok(cs)
}

fn load_theta(path: &Path, n: usize) -> Result<ModelParams<f64>, CliError> {
    let m = ModelParams::<f64>::from_json(&read(path)?).map_err(input_err(path))?;
    m.check_len(n).map_err(input_err(path))?;
    Ok(m)
}

fn load_rows(path: &Path, cs: &ConstraintSet) -> Result<Vec<Vec<u8>>, CliError> {
    let rows = parse_rows(&read(path)?).map_err(input_err(path))?;
    Ok(Dataset::new(rows, cs).map_err(input_err(path))?.rows().to_vec())
}

fn json_line<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serializes") + "\n"
}

fn run_gen(plan: &RunPlan, p: &GenPlan) -> Result<Outcome, CliError> {
    let inst: ProblemInstance = match p.family {
        Family::Ksat => gen_ksat(p.size, p.size, p.k.unwrap_or(DEFAULT_KSAT_K), p.seed)?,
        Family::Sinkfree => gen_sinkfree(
            p.size,
            p.edge_prob.unwrap_or(nelson_core::problems::DEFAULT_EDGE_PROB),
            p.seed,
        )?,
        Family::Routes => gen_routes(p.size, p.seed)?,
    };
    let mut w = Writer::new(&p.out)?;
    w.put("instance.cnf", &emit_dimacs(&inst.constraints))?;
    w.put("instance.json", &json_line(&inst.sidecar()))?;
    w.put("theta.json", &(inst.initial_theta::<f64>().to_json() + "\n"))?;
    w.finish(plan)
}

fn run_sample(plan: &RunPlan, p: &SamplePlan) -> Result<Outcome, CliError> {
    let cs = load_constraints(&p.cnf, p.groups.as_deref())?;
    let theta = load_theta(&p.theta, cs.n_vars())?;
    let (batch, stats) = p.sampler.sample(&cs, &theta, &p.config)?;
    let mut w = Writer::new(&p.out)?;
    w.put("samples.txt", &batch.to_dump())?;
    w.put("stats.json", &(stats.to_json() + "\n"))?;
    if p.sampler != SamplerKind::Gibbs {
        w.put("histogram.csv", &stats.histogram_csv())?;
    }
    if let Some(records) = &stats.records {
        w.put("records.json", &(serde_json::to_string(records).map_err(nelson_core::Error::from)? + "\n"))?;
    }
    let outcome = w.finish(plan)?;
    if stats.exhausted > 0 {
        return Err(CliError::Exhausted {
            exhausted: stats.exhausted,
            rows: batch.len(),
        });
    }
    Ok(outcome)
}

fn run_train(plan: &RunPlan, p: &TrainPlan) -> Result<Outcome, CliError> {
    let cs = load_constraints(&p.cnf, p.groups.as_deref())?;
    let ds = Dataset::from_text(&read(&p.data)?, &cs).map_err(input_err(&p.data))?;
    let theta0 = match &p.theta {
        Some(path) => load_theta(path, cs.n_vars())?,
        None => ModelParams::zeros(cs.n_vars()),
    };
    let out = train(&ds, &cs, &p.config, &theta0)?;
    let mut w = Writer::new(&p.out)?;
    w.put("model.json", &(out.model.to_json() + "\n"))?;
    w.put("trace.csv", &out.trace_csv())?;
    w.finish(plan)
}

fn run_eval(plan: &RunPlan, p: &EvalPlan) -> Result<Outcome, CliError> {
    let cs = load_constraints(&p.cnf, p.groups.as_deref())?;
    let theta = load_theta(&p.theta, cs.n_vars())?;
    let preferred = load_rows(&p.preferred, &cs)?;
    let unseen = load_rows(&p.unseen, &cs)?;

    let (batch, stats) = nelson_sample(&cs, &theta, &SamplerConfig::new(p.grad_m, p.seed))?;
    let mut report = MetricReport::<f64> {
        validity: Some(validity(&batch, &cs)?),
        map_at_10: Some(map_at_10(&theta, &preferred, &unseen)?),
        resample_histogram: Some(stats.round_histogram()),
        ..MetricReport::default()
    };
    if cs.n_vars() <= DEFAULT_ENUMERATION_CAP {
        report.grad_error_l1 = Some(grad_error(&cs, &theta, SamplerKind::Nelson, p.grad_m, p.seed)?);
        let ds = Dataset::new(preferred, &cs)?;
        report.nll = Some(neg_log_likelihood(&theta, &ds, &cs)?);
    }
    let mut w = Writer::new(&p.out)?;
    w.put("metrics.json", &(report.to_json() + "\n"))?;
    w.put("histogram.csv", &stats.histogram_csv())?;
    w.finish(plan)
}

fn run_oracle(plan: &RunPlan, p: &OraclePlan) -> Result<Outcome, CliError> {
    let cs = load_constraints(&p.cnf, p.groups.as_deref())?;
    let theta = load_theta(&p.theta, cs.n_vars())?;
    let mut w = Writer::new(&p.out)?;
    match p.what {
        OracleWhat::Dist => {
            let d = exact_distribution(&cs, &theta)?;
            let body = json!({
                "n_vars": d.n_vars,
                "log_partition": d.log_partition,
                "support_size": d.len(),
                "entries": d.entries(),
            });
            w.put("dist.json", &json_line(&body))?;
        }
        OracleWhat::Grad => {
            let g = exact_grad_log_partition(&cs, &theta)?;
            w.put("grad.json", &json_line(&json!({ "n_vars": cs.n_vars(), "grad": g })))?;
        }
        OracleWhat::Resamples => {
            let r = expected_resamples(&cs, &theta)?;
            w.put("resamples.json", &json_line(&r))?;
        }
    }
    w.finish(plan)
}
