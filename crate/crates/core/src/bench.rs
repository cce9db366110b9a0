//! Single runs and benchmark matrices.
//!
//! A benchmark config is an INI file:
//!
//! ```text
//! [bench]
//! seed = 42
//! eps = 1e-6
//! instances = scsc_small, bilinear_canned, path/to/instance.ini
//! methods = sliding, extragradient, gda
//! max_iters = 100000
//! ; step = 0.01        (baselines; default 1/(2(L_x + L_y + L_xy)))
//!
//! [cost]
//! tau_f = 1
//! tau_g = 1
//! tau_b = 1
//! ```
//!
//! `eps` is relative: every run targets `ℛ² ≤ eps · ℛ²(0)`. Entries of
//! `instances` name a preset or an instance file. The `[cost]` section is
//! optional. Unknown sections or keys are errors.

use std::path::{Path, PathBuf};

use ini::Ini;
use rayon::prelude::*;

use crate::adapter::{plan_restarts, restarted_solve, Accuracy};
use crate::baselines::{run_baseline, BaselineConfig, Method};
use crate::error::{Error, Result};
use crate::instance_file::load_instance;
use crate::instances::{preset, PRESETS};
use crate::oracles::{CostModel, LedgerCounts, OracleLedger};
use crate::saddle::{solve_exact_quadratic, ConditionNumbers, SaddlePointProblem};
use crate::trace::{fmt_real, TraceRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    Sliding,
    Baseline(Method),
}

impl std::str::FromStr for SolveMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sliding" => Ok(SolveMethod::Sliding),
            other => other.parse().map(SolveMethod::Baseline).map_err(|_| Error::Config {
                field: "method".into(),
                msg: format!("unknown method `{other}` (expected sliding, extragradient or gda)"),
            }),
        }
    }
}

impl std::fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveMethod::Sliding => "sliding",
            SolveMethod::Baseline(Method::Extragradient) => "extragradient",
            SolveMethod::Baseline(Method::Gda) => "gda",
        })
    }
}

/// Preset name, or a path to an instance file.
pub fn load_problem(source: &str, seed: u64) -> Result<SaddlePointProblem> {
    if PRESETS.contains(&source) {
        return preset(source, seed);
    }
    let path = Path::new(source);
    if path.is_file() {
        return load_instance(path);
    }
    Err(Error::Config {
        field: "instance".into(),
        msg: format!("`{source}` is neither a preset ({}) nor a file", PRESETS.join(", ")),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub method: SolveMethod,
    /// Relative target on `ℛ²`.
    pub eps: f64,
    pub cost: CostModel,
    /// Baseline step; `None` picks `1/(2Λ)`.
    pub step: Option<f64>,
    pub max_iters: usize,
}

impl RunConfig {
    pub fn new(method: SolveMethod, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Config { field: "eps".into(), msg: format!("must be positive and finite, got {eps}") });
        }
        Ok(RunConfig { method, eps, cost: CostModel::default(), step: None, max_iters: 100_000 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    Diverged,
    Stopped,
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunStatus::Converged => "converged",
            RunStatus::Diverged => "diverged",
            RunStatus::Stopped => "stopped",
        })
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub trace: Vec<TraceRecord>,
    pub status: RunStatus,
    pub cn: ConditionNumbers,
    pub counts: LedgerCounts,
    pub exec_time: f64,
}

impl RunResult {
    pub fn final_r2(&self) -> Option<f64> {
        self.trace.last().and_then(|r| r.r2)
    }
}

/// Runs one method from the origin. The exact solution is computed for
/// instrumentation, so the problem must be quadratic.
pub fn run_one(problem: &SaddlePointProblem, cfg: &RunConfig) -> Result<RunResult> {
    let cn = problem.condition_numbers()?;
    let sol = solve_exact_quadratic(problem)?;
    let r2_0 = sol.r2(&cn, &vec![0.0; problem.dim_x()], &vec![0.0; problem.dim_y()]);
    let target = cfg.eps * r2_0;
    let ledger = OracleLedger::new();
    let (x, y, trace, status) = match cfg.method {
        SolveMethod::Sliding => {
            let mut plan = plan_restarts(&cn, Accuracy::Relative(cfg.eps))?;
            plan.stop_r2 = Some(target);
            let out = restarted_solve(problem, &plan, &ledger, Some(&sol), &cfg.cost)?;
            let done = out.trace.last().and_then(|r| r.r2).is_some_and(|v| v <= target);
            (out.x, out.y, out.trace, if done { RunStatus::Converged } else { RunStatus::Stopped })
        }
        SolveMethod::Baseline(method) => {
            let mut bc = BaselineConfig::with_default_step(method, problem.params(), cfg.max_iters, target);
            if let Some(s) = cfg.step {
                bc.step = s;
            }
            let out = run_baseline(problem, &bc, &ledger, &sol, &cfg.cost)?;
            let status = if out.diverged {
                RunStatus::Diverged
            } else if out.converged {
                RunStatus::Converged
            } else {
                RunStatus::Stopped
            };
            (out.x, out.y, out.trace, status)
        }
    };
    let counts = ledger.counts();
    let exec_time = trace.last().map_or(0.0, |r| r.exec_time);
    Ok(RunResult { x, y, trace, status, cn, counts, exec_time })
}

// ---------------------------------------------------------------------------
// benchmark matrix

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub seed: u64,
    pub instances: Vec<String>,
    pub methods: Vec<SolveMethod>,
    pub run: RunConfig,
}

fn cfg_err(field: &str, msg: impl Into<String>) -> Error {
    Error::Config { field: field.into(), msg: msg.into() }
}

fn parse_field<T: std::str::FromStr>(field: &str, s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse().map_err(|e| cfg_err(field, format!("cannot parse `{s}`: {e}")))
}

fn list(s: &str) -> Vec<String> {
    s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
}

impl BenchConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Parse { line: e.line, msg: e.msg.into_owned() })?;
        for (sec, props) in ini.iter() {
            let allowed: &[&str] = match sec {
                Some("bench") => &["seed", "eps", "instances", "methods", "max_iters", "step"],
                Some("cost") => &["tau_f", "tau_g", "tau_b"],
                None if props.is_empty() => &[],
                None => return Err(cfg_err(props.iter().next().map_or("", |(k, _)| k), "key outside any section")),
                Some(other) => return Err(cfg_err(other, "unknown section")),
            };
            for (k, _) in props.iter() {
                if !allowed.contains(&k) {
                    return Err(cfg_err(&format!("{}.{k}", sec.unwrap_or_default()), "unknown key"));
                }
            }
        }
        let bench = ini.section(Some("bench")).ok_or_else(|| cfg_err("bench", "missing section"))?;
        let req = |k: &str| bench.get(k).ok_or_else(|| cfg_err(&format!("bench.{k}"), "missing key"));

        let seed = match bench.get("seed") {
            Some(s) => parse_field("bench.seed", s)?,
            None => 42,
        };
        let eps: f64 = parse_field("bench.eps", req("eps")?)?;
        let instances = list(req("instances")?);
        if instances.is_empty() {
            return Err(cfg_err("bench.instances", "empty list"));
        }
        let methods = list(req("methods")?)
            .iter()
            .map(|m| m.parse().map_err(|_| cfg_err("bench.methods", format!("unknown method `{m}`"))))
            .collect::<Result<Vec<SolveMethod>>>()?;
        if methods.is_empty() {
            return Err(cfg_err("bench.methods", "empty list"));
        }
        let mut run = RunConfig::new(SolveMethod::Sliding, eps).map_err(|e| match e {
            Error::Config { msg, .. } => cfg_err("bench.eps", msg),
            e => e,
        })?;
        if let Some(s) = bench.get("max_iters") {
            run.max_iters = parse_field("bench.max_iters", s)?;
        }
        if let Some(s) = bench.get("step") {
            let step: f64 = parse_field("bench.step", s)?;
            if !(step >= 0.0 && step.is_finite()) {
                return Err(cfg_err("bench.step", "must be finite and non-negative"));
            }
            run.step = Some(step);
        }
        if let Some(cost) = ini.section(Some("cost")) {
            let tau = |k: &str| -> Result<f64> {
                match cost.get(k) {
                    Some(s) => parse_field(&format!("cost.{k}"), s),
                    None => Ok(1.0),
                }
            };
            let (tf, tg, tb) = (tau("tau_f")?, tau("tau_g")?, tau("tau_b")?);
            run.cost = CostModel::new(tf, tg, tb).map_err(|e| match e {
                Error::Config { field, msg } => cfg_err(&format!("cost.{}", field.to_lowercase()), msg),
                e => e,
            })?;
        }
        Ok(BenchConfig { seed, instances, methods, run })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// `(instance, method)` pairs in row-major config order.
    pub fn runs(&self) -> Vec<(String, SolveMethod)> {
        self.instances.iter().flat_map(|i| self.methods.iter().map(move |m| (i.clone(), *m))).collect()
    }
}

pub const SUMMARY_HEADER: [&str; 13] = [
    "instance",
    "method",
    "kappa_x",
    "kappa_y",
    "kappa_xy",
    "phases",
    "status",
    "final_r2",
    "grad_f",
    "grad_g",
    "matvec_B",
    "matvec_Bt",
    "exec_time",
];

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub instance: String,
    pub method: SolveMethod,
    pub result: RunResult,
}

/// Runs the matrix in parallel; rows come back in config order.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    cfg.runs()
        .into_par_iter()
        .map(|(instance, method)| {
            let problem = load_problem(&instance, cfg.seed)?;
            let run = RunConfig { method, ..cfg.run.clone() };
            let result = run_one(&problem, &run)?;
            Ok(BenchRow { instance, method, result })
        })
        .collect()
}

pub fn write_summary<W: std::io::Write>(out: W, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for row in rows {
        let r = &row.result;
        w.write_record([
            row.instance.clone(),
            row.method.to_string(),
            fmt_real(r.cn.kappa_x),
            fmt_real(r.cn.kappa_y),
            fmt_real(r.cn.kappa_xy),
            (r.trace.len() - 1).to_string(),
            r.status.to_string(),
            r.final_r2().map(fmt_real).unwrap_or_default(),
            r.counts.grad_f.to_string(),
            r.counts.grad_g.to_string(),
            r.counts.matvec_b.to_string(),
            r.counts.matvec_bt.to_string(),
            fmt_real(r.exec_time),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `dir/{index}_{instance}_{method}.csv`, with path separators in the
/// instance name replaced.
pub fn trace_path(dir: &Path, index: usize, row: &BenchRow) -> PathBuf {
    let stem: String =
        row.instance.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' }).collect();
    dir.join(format!("{index:03}_{stem}_{}.csv", row.method))
}
