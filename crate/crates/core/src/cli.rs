//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation or run failure, 2 usage or config
//! error. The `SEED` environment variable replaces the seed of a bench
//! config and the default seed of the other subcommands; an explicit
//! `--seed` still wins.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bench::{load_problem, run_bench, run_one, trace_path, write_summary, BenchConfig, RunConfig, SolveMethod};
use crate::error::{Error, Result};
use crate::instance_file::instance_to_string;
use crate::instances::{
    bilinear_tridiag_matrix, coupled_block_constants, coupling_matrix, generate, preset_spec,
    validate_bilinear_tridiag, validate_spectrum_e, InstanceKind, InstanceSpec, SpectrumReport, SPECTRAL_SLACK,
};
use crate::oracles::CostModel;
use crate::saddle::{spectral_violations, validate_param_inequalities, ProblemParams, SaddlePointProblem};
use crate::trace::{fmt_real, write_trace};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Parser, Debug)]
#[command(name = "sliding-saddle", version, about = "Sliding solver for bilinearly-coupled saddle-point problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write an instance file from a preset or a generator spec.
    GenInstance(GenArgs),
    /// Run one method and write its trace CSV.
    Solve(SolveArgs),
    /// Run a config matrix and write a summary CSV.
    Bench(BenchArgs),
    /// Check assumptions and spectral bounds of an instance.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Preset name.
    #[arg(long, conflicts_with = "kind")]
    preset: Option<String>,
    /// Generator: random, chain, block or tridiag.
    #[arg(long, requires = "params")]
    kind: Option<String>,
    /// `L_x,L_y,L_xy,mu_x,mu_y,mu_xy,mu_yx`
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    params: Option<Vec<f64>>,
    #[arg(long, default_value_t = 4)]
    dim_x: usize,
    #[arg(long, default_value_t = 4)]
    dim_y: usize,
    /// Rank of B for random instances.
    #[arg(long)]
    rank: Option<usize>,
    /// Block size of the structured generators.
    #[arg(long, default_value_t = 8)]
    d: usize,
    /// Magnitude of the linear terms.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Preset name or instance file.
    #[arg(long)]
    instance: String,
    #[arg(long, default_value = "sliding")]
    method: String,
    /// Relative target: stop once `R² <= eps * R²(0)`.
    #[arg(long, allow_negative_numbers = true)]
    eps: f64,
    /// Baseline step; defaults to 1/(2(L_x + L_y + L_xy)).
    #[arg(long, allow_negative_numbers = true)]
    step: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1.0)]
    tau_f: f64,
    #[arg(long, default_value_t = 1.0)]
    tau_g: f64,
    #[arg(long, default_value_t = 1.0)]
    tau_b: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Trace CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Summary CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for per-run trace CSVs.
    #[arg(long)]
    traces: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Preset name or instance file.
    #[arg(long)]
    instance: String,
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Usage(String),
    Invalid(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::Parse { .. } => Failure::Usage(e.to_string()),
            e => Failure::Invalid(e.to_string()),
        }
    }
}

fn env_seed() -> std::result::Result<Option<u64>, Failure> {
    match std::env::var("SEED") {
        Ok(s) => {
            s.trim().parse().map(Some).map_err(|_| Failure::Usage(format!("SEED: cannot parse `{s}` as an integer")))
        }
        Err(_) => Ok(None),
    }
}

fn seed_for(flag: Option<u64>) -> std::result::Result<u64, Failure> {
    Ok(flag.or(env_seed()?).unwrap_or(DEFAULT_SEED))
}

fn emit(out: &Option<PathBuf>, body: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body)?,
        None => std::io::stdout().write_all(body)?,
    }
    Ok(())
}

fn gen_spec(a: &GenArgs, seed: u64) -> std::result::Result<InstanceSpec, Failure> {
    if let Some(name) = &a.preset {
        return preset_spec(name, seed).ok_or_else(|| Failure::Usage(format!("preset: unknown preset `{name}`")));
    }
    let (Some(kind), Some(v)) = (&a.kind, &a.params) else {
        return Err(Failure::Usage("gen-instance needs --preset or --kind with --params".into()));
    };
    if v.len() != 7 {
        return Err(Failure::Usage(format!("params: expected 7 comma-separated values, got {}", v.len())));
    }
    let params = ProblemParams::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6])
        .map_err(|e| Failure::Usage(format!("params: {e}")))?;
    let kind = match kind.as_str() {
        "random" => InstanceKind::RandomQuadratic { dim_x: a.dim_x, dim_y: a.dim_y, rank: a.rank },
        "chain" => InstanceKind::ChainGradient { d: a.d },
        "block" => InstanceKind::CoupledBlock { d: a.d },
        "tridiag" => InstanceKind::BilinearTridiag { d: a.d },
        other => return Err(Failure::Usage(format!("kind: unknown generator `{other}`"))),
    };
    Ok(InstanceSpec { kind, params, a: a.a, seed })
}

fn cmd_gen(a: GenArgs) -> std::result::Result<(), Failure> {
    let seed = seed_for(a.seed)?;
    let problem = if a.preset.as_deref() == Some("bilinear_canned") {
        crate::baselines::canned_bilinear()?
    } else {
        generate(&gen_spec(&a, seed)?)?
    };
    emit(&a.out, instance_to_string(&problem)?.as_bytes())?;
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> std::result::Result<(), Failure> {
    let seed = seed_for(a.seed)?;
    let method: SolveMethod = a.method.parse()?;
    let mut cfg = RunConfig::new(method, a.eps)?;
    cfg.cost = CostModel::new(a.tau_f, a.tau_g, a.tau_b).map_err(|e| Failure::Usage(format!("tau: {e}")))?;
    if let Some(s) = a.step {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Failure::Usage(format!("step: must be finite and non-negative, got {s}")));
        }
    }
    cfg.step = a.step;
    cfg.max_iters = a.max_iters;
    let problem = load_problem(&a.instance, seed)?;
    let res = run_one(&problem, &cfg)?;
    let mut buf = Vec::new();
    write_trace(&mut buf, &res.trace)?;
    emit(&a.out, &buf)?;
    eprintln!(
        "{} on {}: {} after {} phases, final r2 = {}",
        method,
        a.instance,
        res.status,
        res.trace.len() - 1,
        res.final_r2().map(fmt_real).unwrap_or_default()
    );
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> std::result::Result<(), Failure> {
    let mut cfg = BenchConfig::load(&a.config).map_err(|e| match e {
        Error::Io(io) => Failure::Usage(format!("config: {io}")),
        e => e.into(),
    })?;
    if let Some(s) = env_seed()? {
        cfg.seed = s;
    }
    let rows = run_bench(&cfg)?;
    if let Some(dir) = &a.traces {
        std::fs::create_dir_all(dir).map_err(Error::from)?;
        for (i, row) in rows.iter().enumerate() {
            let f = std::fs::File::create(trace_path(dir, i, row)).map_err(Error::from)?;
            write_trace(std::io::BufWriter::new(f), &row.result.trace)?;
        }
    }
    let mut buf = Vec::new();
    write_summary(&mut buf, &rows)?;
    emit(&a.out, &buf)?;
    Ok(())
}

fn spectrum_line(label: &str, r: &SpectrumReport) -> String {
    format!(
        "{label} lower_bound_ok={} upper_bound_ok={} sigma2_min={} lower={} sigma2_max={} upper={}",
        r.lower_bound_ok(),
        r.upper_bound_ok(),
        fmt_real(r.sigma2_min),
        fmt_real(r.lower),
        fmt_real(r.sigma2_max),
        fmt_real(r.upper)
    )
}

/// Report lines and whether everything passed.
fn validation_report(problem: &SaddlePointProblem, spec: Option<&InstanceSpec>) -> Result<(Vec<String>, bool)> {
    let mut lines = Vec::new();
    let mut ok = true;
    let p = problem.params();
    lines.push(format!(
        "params l_x={} l_y={} l_xy={} mu_x={} mu_y={} mu_xy={} mu_yx={}",
        p.l_x, p.l_y, p.l_xy, p.mu_x, p.mu_y, p.mu_xy, p.mu_yx
    ));
    match problem.condition_numbers() {
        Ok(cn) => lines.push(format!(
            "condition delta_x={} delta_y={} kappa_x={} kappa_y={} kappa_xy={}",
            fmt_real(cn.delta_x),
            fmt_real(cn.delta_y),
            fmt_real(cn.kappa_x),
            fmt_real(cn.kappa_y),
            fmt_real(cn.kappa_xy)
        )),
        Err(e) => {
            ok = false;
            lines.push(format!("condition error: {e}"));
        }
    }
    let rep = validate_param_inequalities(p);
    ok &= rep.ok();
    lines.push(format!("parameter_inequalities_ok={}", rep.ok()));
    for v in &rep.violations {
        lines.push(format!("  violated: {v}"));
    }
    let sv = spectral_violations(problem, SPECTRAL_SLACK)?;
    ok &= sv.is_empty();
    lines.push(format!("spectral_ok={}", sv.is_empty()));
    for v in &sv {
        lines.push(format!("  violated: {v}"));
    }
    match spec.map(|s| &s.kind) {
        Some(InstanceKind::CoupledBlock { .. }) => {
            let (n, al, be, ga) = coupled_block_constants(p)?;
            let gamma = if p.mu_xy > 0.0 { ga } else { 0.0 };
            let e = coupling_matrix(n, al, be, (gamma != 0.0).then_some(gamma))?;
            let r = validate_spectrum_e(&e, al, be, gamma, n, SPECTRAL_SLACK)?;
            ok &= r.ok();
            lines.push(spectrum_line(&format!("coupling_matrix n={n}"), &r));
        }
        Some(InstanceKind::BilinearTridiag { d }) => {
            let mu_bar = p.mu_xy.max(p.mu_yx);
            let b = bilinear_tridiag_matrix(*d, p.l_xy, mu_bar)?;
            let r = validate_bilinear_tridiag(&b, p.l_xy, mu_bar, SPECTRAL_SLACK)?;
            ok &= r.ok();
            lines.push(spectrum_line(&format!("bidiagonal_matrix d={d}"), &r));
        }
        _ => {}
    }
    lines.push(format!("valid={ok}"));
    Ok((lines, ok))
}

fn cmd_validate(a: ValidateArgs) -> std::result::Result<(), Failure> {
    let seed = seed_for(a.seed)?;
    let problem = load_problem(&a.instance, seed)?;
    let spec = preset_spec(&a.instance, seed);
    let (lines, ok) = validation_report(&problem, spec.as_ref())?;
    let mut out = std::io::stdout().lock();
    for l in lines {
        writeln!(out, "{l}").map_err(Error::from)?;
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Invalid("validation failed".into()))
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let res = match cli.command {
        Command::GenInstance(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match res {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["sliding-saddle", "solve", "--bogus"]), 2);
        assert_eq!(run(["sliding-saddle"]), 2);
        assert_eq!(run(["sliding-saddle", "solve", "--instance", "scsc_small", "--eps", "-1"]), 2);
        assert_eq!(
            run(["sliding-saddle", "solve", "--instance", "scsc_small", "--eps", "1e-3", "--method", "newton"]),
            2
        );
        assert_eq!(run(["sliding-saddle", "validate", "--instance", "missing_preset"]), 2);
    }

    #[test]
    fn coupled_block_report() {
        let spec = preset_spec("coupled_block_n3", 42).unwrap();
        let prob = generate(&spec).unwrap();
        let (lines, ok) = validation_report(&prob, Some(&spec)).unwrap();
        assert!(ok);
        assert!(lines.iter().any(|l| l.starts_with("coupling_matrix n=3 lower_bound_ok=true upper_bound_ok=true")));
    }
}
