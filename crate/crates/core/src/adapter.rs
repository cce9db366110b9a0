//! Saddle problems as three-component VIs, plus the restart driver.
//!
//! On `z = (x, y)` the components are
//! `p₁ = f(x)`, `p₂ = g(y)`,
//! `p₃ = (β_x/2)‖Bx − ∇g(y_in)‖² + (β_y/2)‖Bᵀy + ∇f(x_in)‖²` and
//! `Q₃(x, y) = (Bᵀy, −Bx)`, in the geometry `P = diag(δ_x I, δ_y I)`.

use crate::error::{Error, Result};
use crate::numerics::{add, axpy, dot, norm_sq, scaled, sub, DiagWeight};
use crate::oracles::{
    bregman, counted_map, execution_time, CostModel, Counted, Counter, LinearMap, MonotoneOp, OracleLedger, SmoothFn,
};
use crate::saddle::{check_solvable, ConditionNumbers, SaddlePointProblem, SolutionSet};
use crate::sliding::{make_schedule, run_sliding, Schedule};
use crate::trace::TraceRecord;
use crate::vi::{gap, ConstraintSet, VIComponent, VIProblem};

/// Inner accuracy of one pass.
pub const EPS_INNER: f64 = 1.0 / 72.0;

#[derive(Clone, Debug, PartialEq)]
pub struct AdapterConfig {
    pub beta_x: f64,
    pub beta_y: f64,
    pub weight: DiagWeight,
    pub eps_inner: f64,
    pub cn: ConditionNumbers,
}

impl AdapterConfig {
    pub fn new(problem: &SaddlePointProblem) -> Result<Self> {
        let p = problem.params();
        let cn = check_solvable(p)?;
        let weight = DiagWeight::two_blocks(problem.dim_x(), cn.delta_x, problem.dim_y(), cn.delta_y)?;
        Ok(AdapterConfig { beta_x: 0.25 / p.l_y, beta_y: 0.25 / p.l_x, weight, eps_inner: EPS_INNER, cn })
    }

    /// Declared `(L, M)` of the three components.
    pub fn constants(&self) -> ([f64; 3], [f64; 3]) {
        let cn = &self.cn;
        ([cn.kappa_x, cn.kappa_y, cn.kappa_xy], [0.0, 0.0, cn.kappa_xy.sqrt()])
    }

    pub fn schedule(&self) -> Result<Schedule> {
        let (l, m) = self.constants();
        make_schedule(&l, &m, self.eps_inner)
    }
}

/// `(x, y) ↦ f(x)`.
pub struct LiftX<'a> {
    f: Box<dyn SmoothFn + 'a>,
    dy: usize,
}

impl SmoothFn for LiftX<'_> {
    fn dim(&self) -> usize {
        self.f.dim() + self.dy
    }
    fn value(&self, z: &[f64]) -> f64 {
        self.f.value(&z[..self.f.dim()])
    }
    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let mut g = self.f.gradient(&z[..self.f.dim()]);
        g.resize(self.dim(), 0.0);
        g
    }
    fn smoothness(&self) -> f64 {
        self.f.smoothness()
    }
    fn strong_convexity(&self) -> f64 {
        0.0
    }
}

/// `(x, y) ↦ g(y)`.
pub struct LiftY<'a> {
    g: Box<dyn SmoothFn + 'a>,
    dx: usize,
}

impl SmoothFn for LiftY<'_> {
    fn dim(&self) -> usize {
        self.dx + self.g.dim()
    }
    fn value(&self, z: &[f64]) -> f64 {
        self.g.value(&z[self.dx..])
    }
    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dx];
        out.extend(self.g.gradient(&z[self.dx..]));
        out
    }
    fn smoothness(&self) -> f64 {
        self.g.smoothness()
    }
    fn strong_convexity(&self) -> f64 {
        0.0
    }
}

/// The anchored coupling penalty `p₃`. Values go through the uncounted map
/// (they are instrumentation only); gradients through the counted one.
pub struct CouplingPenalty<'a> {
    b: Box<dyn LinearMap + 'a>,
    b_plain: &'a dyn LinearMap,
    grad_f_in: Vec<f64>,
    grad_g_in: Vec<f64>,
    beta_x: f64,
    beta_y: f64,
}

impl CouplingPenalty<'_> {
    fn dx(&self) -> usize {
        self.b_plain.cols()
    }
}

impl SmoothFn for CouplingPenalty<'_> {
    fn dim(&self) -> usize {
        self.b_plain.cols() + self.b_plain.rows()
    }
    fn value(&self, z: &[f64]) -> f64 {
        let (x, y) = z.split_at(self.dx());
        let rx = sub(&self.b_plain.forward(x), &self.grad_g_in);
        let ry = add(&self.b_plain.adjoint(y), &self.grad_f_in);
        0.5 * self.beta_x * norm_sq(&rx) + 0.5 * self.beta_y * norm_sq(&ry)
    }
    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let (x, y) = z.split_at(self.dx());
        let rx = sub(&self.b.forward(x), &self.grad_g_in);
        let ry = add(&self.b.adjoint(y), &self.grad_f_in);
        let mut g = scaled(self.beta_x, &self.b.adjoint(&rx));
        g.extend(scaled(self.beta_y, &self.b.forward(&ry)));
        g
    }
    fn smoothness(&self) -> f64 {
        f64::NAN
    }
    fn strong_convexity(&self) -> f64 {
        0.0
    }
}

/// `Q₃(x, y) = (Bᵀy, −Bx)`.
pub struct BilinearOp<'a> {
    b: Box<dyn LinearMap + 'a>,
}

impl MonotoneOp for BilinearOp<'_> {
    fn dim(&self) -> usize {
        self.b.cols() + self.b.rows()
    }
    fn apply(&self, z: &[f64]) -> Vec<f64> {
        let (x, y) = z.split_at(self.b.cols());
        let mut out = self.b.adjoint(y);
        out.extend(self.b.forward(x).iter().map(|v| -v));
        out
    }
}

/// Builds the three-component VI anchored at `z_in = (x_in, y_in)`. The two
/// anchor gradients are evaluated here, once, through the ledger.
pub fn build_vi<'a>(
    problem: &'a SaddlePointProblem,
    cfg: &AdapterConfig,
    z_in: &[f64],
    ledger: &'a OracleLedger,
) -> Result<VIProblem<'a>> {
    let (dx, dy) = (problem.dim_x(), problem.dim_y());
    if z_in.len() != dx + dy {
        return Err(Error::dims(dx + dy, z_in.len()));
    }
    let f: &'a (dyn SmoothFn + Send + Sync) = problem.f();
    let g: &'a (dyn SmoothFn + Send + Sync) = problem.g();
    let b: &'a (dyn LinearMap + Send + Sync) = problem.b();
    let cf = Counted::new(f, ledger, Counter::GradF);
    let cg = Counted::new(g, ledger, Counter::GradG);
    let grad_f_in = cf.gradient(&z_in[..dx]);
    let grad_g_in = cg.gradient(&z_in[dx..]);
    let (l, m) = cfg.constants();
    let p3 = CouplingPenalty {
        b: Box::new(counted_map(b, ledger)),
        b_plain: b,
        grad_f_in,
        grad_g_in,
        beta_x: cfg.beta_x,
        beta_y: cfg.beta_y,
    };
    let q3 = BilinearOp { b: Box::new(counted_map(b, ledger)) };
    let comps = vec![
        VIComponent::smooth(LiftX { f: Box::new(cf), dy }, l[0]),
        VIComponent::smooth(LiftY { g: Box::new(cg), dx }, l[1]),
        VIComponent::new(Some(Box::new(p3)), Some(Box::new(q3)), l[2], m[2]),
    ];
    VIProblem::new(comps, cfg.weight.clone(), ConstraintSet::FullSpace)
}

/// `ℛ² + 12 D_f(x, x*) + 12 D_g(y, y*)` with `(x*, y*)` the projection of
/// `(x, y)` onto the solution set.
pub fn lyapunov(problem: &SaddlePointProblem, sol: &SolutionSet, x: &[f64], y: &[f64]) -> Result<f64> {
    let cn = problem.condition_numbers()?;
    let xs = sol.project_x(x);
    let ys = sol.project_y(y);
    let df = bregman(problem.f(), x, &xs)?;
    let dg = bregman(problem.g(), y, &ys)?;
    Ok(sol.r2(&cn, x, y) + 12.0 * df + 12.0 * dg)
}

/// Target accuracy of a restarted run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Accuracy {
    /// `ℛ² ≤ eps` given a bound `r2` on the initial `ℛ²`.
    Absolute { eps: f64, r2: f64 },
    /// `ℛ² ≤ ratio · ℛ²(z_in⁰)`; needs no knowledge of the solution.
    Relative(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RestartPlan {
    /// `ε / ℛ²(z_in⁰)`.
    pub ratio: f64,
    /// `1 + 12κ_x + 12κ_y`.
    pub c: f64,
    pub t_restarts: usize,
    /// Stop early once `ℛ² ≤ stop_r2`; only honored when a solution set is
    /// supplied.
    pub stop_r2: Option<f64>,
}

/// `⌈log(c R²/ε) / log(3/2)⌉`, floored at zero.
pub fn restart_count(c: f64, r2: f64, eps: f64) -> usize {
    if r2 <= 0.0 {
        return 0;
    }
    let v = (c * r2 / eps).ln() / 1.5f64.ln();
    if v <= 0.0 {
        0
    } else {
        v.ceil() as usize
    }
}

pub fn plan_restarts(cn: &ConditionNumbers, acc: Accuracy) -> Result<RestartPlan> {
    let c = 1.0 + 12.0 * cn.kappa_x + 12.0 * cn.kappa_y;
    let (ratio, t) = match acc {
        Accuracy::Absolute { eps, r2 } => {
            if !(eps > 0.0 && eps.is_finite()) || !(r2 >= 0.0 && r2.is_finite()) {
                return Err(Error::Config {
                    field: "eps".into(),
                    msg: format!("need eps > 0 and R² >= 0, got {eps}, {r2}"),
                });
            }
            (eps / r2, restart_count(c, r2, eps))
        }
        Accuracy::Relative(ratio) => {
            if !(ratio > 0.0 && ratio.is_finite()) {
                return Err(Error::Config {
                    field: "eps".into(),
                    msg: format!("relative accuracy must be positive, got {ratio}"),
                });
            }
            (ratio, restart_count(c, 1.0, ratio))
        }
    };
    Ok(RestartPlan { ratio, c, t_restarts: t, stop_r2: None })
}

#[derive(Clone, Debug)]
pub struct RestartOutput {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Record 0 is the starting point; record `r` follows restart `r`.
    pub trace: Vec<TraceRecord>,
    /// Restarts actually performed.
    pub restarts: usize,
    pub schedule: Schedule,
}

/// Repeated passes of the sliding method from `z_in⁰ = 0`, each on a VI
/// re-anchored at the previous output. With a solution set, every record
/// carries `ℛ²`, `Ψ` and the pass's gap at the projection of its start.
pub fn restarted_solve(
    problem: &SaddlePointProblem,
    plan: &RestartPlan,
    ledger: &OracleLedger,
    solution: Option<&SolutionSet>,
    cost: &CostModel,
) -> Result<RestartOutput> {
    let cfg = AdapterConfig::new(problem)?;
    let schedule = cfg.schedule()?;
    let (dx, dy) = (problem.dim_x(), problem.dim_y());
    let mut z = vec![0.0; dx + dy];

    let record = |phase: usize, z: &[f64], gap: Option<f64>| -> Result<TraceRecord> {
        let (r2, psi) = match solution {
            Some(sol) => {
                let (x, y) = z.split_at(dx);
                (Some(sol.r2(&cfg.cn, x, y)), Some(lyapunov(problem, sol, x, y)?))
            }
            None => (None, None),
        };
        let counts = ledger.counts();
        Ok(TraceRecord { phase, r2, psi, gap, counts, exec_time: execution_time(&counts, cost) })
    };

    let mut trace = vec![record(0, &z, None)?];
    for r in 1..=plan.t_restarts {
        let vi = build_vi(problem, &cfg, &z, ledger)?;
        let out = run_sliding(&vi, &schedule, &z, None)?;
        let gap_val = match solution {
            Some(sol) => {
                let scratch = OracleLedger::new();
                let probe_vi = build_vi(problem, &cfg, &z, &scratch)?;
                let (x, y) = z.split_at(dx);
                let mut zs = sol.project_x(x);
                zs.extend(sol.project_y(y));
                Some(gap(&probe_vi, &out.z_out, &zs)?)
            }
            None => None,
        };
        z = out.z_out;
        let rec = record(r, &z, gap_val)?;
        let done = matches!((rec.r2, plan.stop_r2), (Some(v), Some(s)) if v <= s);
        trace.push(rec);
        if done {
            break;
        }
    }
    let restarts = trace.len() - 1;
    let y = z.split_off(dx);
    Ok(RestartOutput { x: z, y, trace, restarts, schedule })
}

/// `sup ‖∇p(z) − ∇p(z')‖_{P⁻¹} / ‖z − z'‖_P` estimated on given pairs.
pub fn empirical_lipschitz(
    eval: &dyn Fn(&[f64]) -> Vec<f64>,
    weight: &DiagWeight,
    pairs: &[(Vec<f64>, Vec<f64>)],
) -> f64 {
    pairs
        .iter()
        .map(|(a, b)| {
            let num = weight.dual_norm(&sub(&eval(a), &eval(b)));
            let den = weight.norm(&sub(a, b));
            if den > 0.0 {
                num / den
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

/// `<G(z) − G(z'), z − z'>` for a VI's summed operator, for monotonicity
/// checks.
pub fn monotonicity(vi: &VIProblem<'_>, a: &[f64], b: &[f64]) -> f64 {
    let mut d = vi.operator(a);
    axpy(-1.0, &vi.operator(b), &mut d);
    dot(&d, &sub(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Mat;
    use crate::oracles::Quadratic;
    use crate::saddle::{solve_exact_quadratic, ProblemParams};

    fn scalar_problem(l_y: f64) -> SaddlePointProblem {
        let p = ProblemParams::new(1.0, l_y, 2.0, 0.1, 0.1, 0.0, 0.0).unwrap();
        SaddlePointProblem::new(
            Box::new(Quadratic::isotropic(0.5, vec![-1.0])),
            Box::new(Quadratic::isotropic(0.5, vec![0.0])),
            Box::new(Mat::identity(1)),
            p,
        )
        .unwrap()
    }

    #[test]
    fn config_examples() {
        let cfg = AdapterConfig::new(&scalar_problem(50.0)).unwrap();
        assert_eq!(cfg.beta_x, 0.005);
        assert_eq!(cfg.beta_y, 0.25);
        assert_eq!(cfg.eps_inner, 1.0 / 72.0);
        assert_eq!(cfg.weight.diagonal(), &[0.1, 0.1]);
    }

    #[test]
    fn bilinear_operator_on_identity() {
        let ledger = OracleLedger::new();
        let b = Mat::identity(1);
        let q = BilinearOp { b: Box::new(counted_map(&b, &ledger)) };
        assert_eq!(q.apply(&[2.0, 3.0]), vec![3.0, -2.0]);
        let c = ledger.counts();
        assert_eq!((c.matvec_b, c.matvec_bt), (1, 1));
    }

    #[test]
    fn anchored_penalty_vanishes_at_solution() {
        let prob = scalar_problem(1.0);
        let sol = solve_exact_quadratic(&prob).unwrap();
        let cfg = AdapterConfig::new(&prob).unwrap();
        let ledger = OracleLedger::new();
        let mut zs = sol.x_star.clone();
        zs.extend(&sol.y_star);
        let vi = build_vi(&prob, &cfg, &zs, &ledger).unwrap();
        let c = ledger.counts();
        assert_eq!((c.grad_f, c.grad_g), (1, 1));
        let g3 = vi.components()[2].p.as_ref().unwrap().gradient(&zs);
        assert!(g3.iter().all(|v| v.abs() <= 1e-10));
        let c = ledger.counts();
        assert_eq!((c.matvec_b, c.matvec_bt), (2, 2));
    }

    #[test]
    fn restart_count_examples() {
        assert_eq!(restart_count(1501.0, 1.0, 1e-6), 53);
        assert_eq!(restart_count(1501.0, 1.0, 1.0), (1501f64.ln() / 1.5f64.ln()).ceil() as usize);
        assert_eq!(restart_count(1.0, 1.0, 1.0), 0);
        assert_eq!(restart_count(10.0, 0.0, 1.0), 0);
        let cn = ConditionNumbers { delta_x: 1.0, delta_y: 1.0, kappa_x: 100.0, kappa_y: 25.0, kappa_xy: 1.0 };
        let plan = plan_restarts(&cn, Accuracy::Absolute { eps: 1e-6, r2: 1.0 }).unwrap();
        assert_eq!((plan.c, plan.t_restarts), (1501.0, 53));
    }

    #[test]
    fn lyapunov_examples() {
        // f = g = ½‖·‖², δ = (1, 1) needs μ_x = μ_y = 1
        let p = ProblemParams::new(5.0, 5.0, 19.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        let prob = SaddlePointProblem::new(
            Box::new(Quadratic::isotropic(1.0, vec![0.0, 0.0])),
            Box::new(Quadratic::isotropic(1.0, vec![0.0])),
            Box::new(Mat::from_rows(&[vec![1.0, 0.0]]).unwrap()),
            p,
        )
        .unwrap();
        let sol = solve_exact_quadratic(&prob).unwrap();
        assert_eq!(lyapunov(&prob, &sol, &sol.x_star, &sol.y_star).unwrap(), 0.0);
        let psi = lyapunov(&prob, &sol, &[0.6, 0.8], &sol.y_star).unwrap();
        assert!((psi - 7.0).abs() < 1e-12);
    }

    #[test]
    fn refuses_assumption_violations() {
        let p = ProblemParams::new(4.0, 5.0, 19.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        let prob = SaddlePointProblem::new(
            Box::new(Quadratic::isotropic(1.0, vec![0.0])),
            Box::new(Quadratic::isotropic(1.0, vec![0.0])),
            Box::new(Mat::identity(1)),
            p,
        )
        .unwrap();
        assert!(matches!(AdapterConfig::new(&prob), Err(Error::AssumptionViolation(_))));
    }
}
