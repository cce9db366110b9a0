//! Extragradient and simultaneous gradient descent-ascent on the saddle
//! operator `G(x, y) = (∇f(x) + Bᵀy, ∇g(y) − Bx)`.

use crate::error::{Error, Result};
use crate::numerics::{all_finite, axpy, Mat};
use crate::oracles::{
    counted_map, execution_time, CostModel, Counted, Counter, LinearMap, OracleLedger, Quadratic, SmoothFn,
};
use crate::saddle::{ProblemParams, SaddlePointProblem, SolutionSet};
use crate::trace::TraceRecord;

/// A run is declared divergent once `ℛ²` exceeds this multiple of its
/// starting value.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Extragradient,
    Gda,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "extragradient" | "eg" => Ok(Method::Extragradient),
            "gda" => Ok(Method::Gda),
            _ => Err(Error::Config { field: "method".into(), msg: format!("unknown baseline `{s}`") }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaselineConfig {
    pub method: Method,
    pub step: f64,
    pub max_iters: usize,
    /// Stop once `ℛ² ≤ stop_r2`.
    pub stop_r2: f64,
}

/// `L_x + L_y + L_xy`, a Lipschitz bound for `G`.
pub fn operator_lipschitz(p: &ProblemParams) -> f64 {
    p.l_x + p.l_y + p.l_xy
}

impl BaselineConfig {
    /// Step `1/(2Λ)`.
    pub fn with_default_step(method: Method, p: &ProblemParams, max_iters: usize, stop_r2: f64) -> Self {
        BaselineConfig { method, step: 0.5 / operator_lipschitz(p), max_iters, stop_r2 }
    }

    fn check(&self) -> Result<()> {
        if !(self.step >= 0.0 && self.step.is_finite()) {
            return Err(Error::Config {
                field: "step".into(),
                msg: format!("must be finite and non-negative, got {}", self.step),
            });
        }
        if self.stop_r2.is_nan() {
            return Err(Error::Config { field: "stop_r2".into(), msg: "is NaN".into() });
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct BaselineOutput {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Record 0 is the start; record `k` follows iteration `k`.
    pub trace: Vec<TraceRecord>,
    pub iterations: usize,
    pub converged: bool,
    pub diverged: bool,
}

struct CountedOperator<'a> {
    f: Counted<'a, dyn SmoothFn + Send + Sync + 'a>,
    g: Counted<'a, dyn SmoothFn + Send + Sync + 'a>,
    b: Counted<'a, dyn LinearMap + Send + Sync + 'a>,
}

impl CountedOperator<'_> {
    fn eval(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut gx = self.f.gradient(x);
        axpy(1.0, &self.b.adjoint(y), &mut gx);
        let mut gy = self.g.gradient(y);
        axpy(-1.0, &self.b.forward(x), &mut gy);
        (gx, gy)
    }
}

/// Runs from `(0, 0)` until `ℛ² ≤ stop_r2`, divergence, or `max_iters`.
/// Divergence is reported in the output rather than returned as an error.
pub fn run_baseline(
    problem: &SaddlePointProblem,
    config: &BaselineConfig,
    ledger: &OracleLedger,
    solution: &SolutionSet,
    cost: &CostModel,
) -> Result<BaselineOutput> {
    config.check()?;
    let cn = problem.condition_numbers()?;
    let op = CountedOperator {
        f: Counted::new(problem.f(), ledger, Counter::GradF),
        g: Counted::new(problem.g(), ledger, Counter::GradG),
        b: counted_map(problem.b(), ledger),
    };
    let mut x = vec![0.0; problem.dim_x()];
    let mut y = vec![0.0; problem.dim_y()];
    let eta = config.step;

    let record = |phase: usize, r2: f64| {
        let counts = ledger.counts();
        TraceRecord { phase, r2: Some(r2), psi: None, gap: None, counts, exec_time: execution_time(&counts, cost) }
    };
    let r2_0 = solution.r2(&cn, &x, &y);
    let mut trace = vec![record(0, r2_0)];
    let mut converged = r2_0 <= config.stop_r2;
    let mut diverged = false;
    let mut iterations = 0;

    while !converged && !diverged && iterations < config.max_iters {
        let (gx, gy) = op.eval(&x, &y);
        match config.method {
            Method::Extragradient => {
                let mut xh = x.clone();
                let mut yh = y.clone();
                axpy(-eta, &gx, &mut xh);
                axpy(-eta, &gy, &mut yh);
                let (hx, hy) = op.eval(&xh, &yh);
                axpy(-eta, &hx, &mut x);
                axpy(-eta, &hy, &mut y);
            }
            Method::Gda => {
                axpy(-eta, &gx, &mut x);
                axpy(-eta, &gy, &mut y);
            }
        }
        iterations += 1;
        let r2 = solution.r2(&cn, &x, &y);
        trace.push(record(iterations, r2));
        if !all_finite(&x) || !all_finite(&y) || !r2.is_finite() || (r2_0 > 0.0 && r2 > DIVERGENCE_FACTOR * r2_0) {
            diverged = true;
        } else {
            converged = r2 <= config.stop_r2;
        }
    }
    Ok(BaselineOutput { x, y, trace, iterations, converged, diverged })
}

/// Bilinear problem with linear terms only: `f(x) = ⟨1, x⟩`, `g(y) = ⟨1, y⟩`,
/// `B = diag(2, 38)`. Declared `L_x = L_y = 9`, `L_xy = 38`,
/// `μ_xy = μ_yx = 2`, so `κ_x = κ_y ≈ 20` against `κ_xy ≈ 7310`.
pub fn canned_bilinear() -> Result<SaddlePointProblem> {
    let p = ProblemParams::new(9.0, 9.0, 38.0, 0.0, 0.0, 2.0, 2.0)?;
    let f = Quadratic::with_constants(Mat::zeros(2, 2), vec![1.0, 1.0], 9.0, 0.0)?;
    let g = Quadratic::with_constants(Mat::zeros(2, 2), vec![1.0, 1.0], 9.0, 0.0)?;
    SaddlePointProblem::new(Box::new(f), Box::new(g), Box::new(Mat::from_diag(&[2.0, 38.0])), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::LedgerCounts;
    use crate::saddle::solve_exact_quadratic;

    /// `B = [1]` with linear terms only, so `z* = (-1, -1)` and a run from
    /// the origin starts at `z − z* = (1, 1)`.
    fn unit_bilinear() -> SaddlePointProblem {
        let p = ProblemParams::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.5, 0.5).unwrap();
        SaddlePointProblem::new(
            Box::new(Quadratic::with_constants(Mat::zeros(1, 1), vec![1.0], 1.0, 0.0).unwrap()),
            Box::new(Quadratic::with_constants(Mat::zeros(1, 1), vec![-1.0], 1.0, 0.0).unwrap()),
            Box::new(Mat::identity(1)),
            p,
        )
        .unwrap()
    }

    #[test]
    fn extragradient_on_unit_bilinear_contracts() {
        let prob = unit_bilinear();
        let sol = solve_exact_quadratic(&prob).unwrap();
        assert!((sol.x_star[0] + 1.0).abs() < 1e-15 && (sol.y_star[0] + 1.0).abs() < 1e-15);
        let cfg = BaselineConfig { method: Method::Extragradient, step: 0.25, max_iters: 50, stop_r2: 0.0 };
        let ledger = OracleLedger::new();
        let out = run_baseline(&prob, &cfg, &ledger, &sol, &CostModel::default()).unwrap();
        let r2: Vec<f64> = out.trace.iter().map(|r| r.r2.unwrap()).collect();
        assert!(r2.windows(2).all(|w| w[1] < w[0]));
        // G(u, v) = (v, -u) in the shifted coordinates
        let (mut u, mut v) = (1.0f64, 1.0f64);
        for _ in 0..50 {
            let (uh, vh) = (u - 0.25 * v, v + 0.25 * u);
            (u, v) = (u - 0.25 * vh, v + 0.25 * uh);
        }
        let want = 0.25 * (u * u + v * v);
        assert!((r2[50] - want).abs() < 1e-14 * want.max(1e-300), "{} vs {want}", r2[50]);
    }

    #[test]
    fn extragradient_costs_two_of_each_per_iteration() {
        let prob = canned_bilinear().unwrap();
        let sol = solve_exact_quadratic(&prob).unwrap();
        let cfg = BaselineConfig::with_default_step(Method::Extragradient, prob.params(), 7, 0.0);
        let ledger = OracleLedger::new();
        let out = run_baseline(&prob, &cfg, &ledger, &sol, &CostModel::default()).unwrap();
        assert_eq!(out.iterations, 7);
        for (k, rec) in out.trace.iter().enumerate() {
            let c = 2 * k as u64;
            assert_eq!(rec.counts, LedgerCounts { grad_f: c, grad_g: c, matvec_b: c, matvec_bt: c });
        }
    }

    #[test]
    fn gda_on_bilinear_diverges() {
        let prob = canned_bilinear().unwrap();
        let sol = solve_exact_quadratic(&prob).unwrap();
        let cfg = BaselineConfig { method: Method::Gda, step: 0.01, max_iters: 100_000, stop_r2: 1e-12 };
        let ledger = OracleLedger::new();
        let out = run_baseline(&prob, &cfg, &ledger, &sol, &CostModel::default()).unwrap();
        assert!(out.diverged && !out.converged);
        let norms: Vec<f64> = out.trace.iter().map(|r| r.r2.unwrap()).collect();
        assert!(norms.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn zero_step_keeps_iterates() {
        let prob = canned_bilinear().unwrap();
        let sol = solve_exact_quadratic(&prob).unwrap();
        for method in [Method::Extragradient, Method::Gda] {
            let cfg = BaselineConfig { method, step: 0.0, max_iters: 5, stop_r2: 0.0 };
            let out = run_baseline(&prob, &cfg, &OracleLedger::new(), &sol, &CostModel::default()).unwrap();
            assert_eq!(out.x, vec![0.0; 2]);
            assert_eq!(out.y, vec![0.0; 2]);
        }
    }

    #[test]
    fn canned_solution() {
        let prob = canned_bilinear().unwrap();
        let sol = solve_exact_quadratic(&prob).unwrap();
        // x* = B⁻¹ q_g, y* = −B⁻ᵀ q_f
        let want_x = [0.5, 1.0 / 38.0];
        for (a, b) in sol.x_star.iter().zip(want_x) {
            assert!((a - b).abs() < 1e-14);
        }
        for (a, b) in sol.y_star.iter().zip(want_x) {
            assert!((a + b).abs() < 1e-14);
        }
    }

    #[test]
    fn negative_step_rejected() {
        let prob = canned_bilinear().unwrap();
        let sol = solve_exact_quadratic(&prob).unwrap();
        let cfg = BaselineConfig { method: Method::Gda, step: -1.0, max_iters: 1, stop_r2: 0.0 };
        assert!(run_baseline(&prob, &cfg, &OracleLedger::new(), &sol, &CostModel::default()).is_err());
    }
}
