//! The bilinearly-coupled saddle-point problem
//! `min_x max_y f(x) + <y, Bx> - g(y)`, its constants and exact solutions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{self, add, lerp, norm, norm_sq, project_out, sub, JacobiSvd, Mat, RANK_TOL};
use crate::oracles::{materialize, LinearMap, SmoothFn};

/// The parameter vector `π`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemParams {
    pub l_x: f64,
    pub l_y: f64,
    pub l_xy: f64,
    pub mu_x: f64,
    pub mu_y: f64,
    pub mu_xy: f64,
    pub mu_yx: f64,
}

impl ProblemParams {
    pub fn new(l_x: f64, l_y: f64, l_xy: f64, mu_x: f64, mu_y: f64, mu_xy: f64, mu_yx: f64) -> Result<Self> {
        let p = ProblemParams { l_x, l_y, l_xy, mu_x, mu_y, mu_xy, mu_yx };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        let all = [self.l_x, self.l_y, self.l_xy, self.mu_x, self.mu_y, self.mu_xy, self.mu_yx];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInstance(format!("parameters must be finite and non-negative: {self:?}")));
        }
        if !(self.l_x > self.mu_x) {
            return Err(Error::InvalidInstance("need L_x > mu_x".into()));
        }
        if !(self.l_y > self.mu_y) {
            return Err(Error::InvalidInstance("need L_y > mu_y".into()));
        }
        if !(self.l_xy > self.mu_xy && self.l_xy > self.mu_yx) {
            return Err(Error::InvalidInstance("need L_xy > mu_xy, mu_yx".into()));
        }
        if self.mu_xy > 0.0 && self.mu_yx > 0.0 && self.mu_xy != self.mu_yx {
            return Err(Error::InvalidInstance("mu_xy and mu_yx both positive but different".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionNumbers {
    pub delta_x: f64,
    pub delta_y: f64,
    pub kappa_x: f64,
    pub kappa_y: f64,
    pub kappa_xy: f64,
}

pub fn condition_numbers(p: &ProblemParams) -> Result<ConditionNumbers> {
    let delta_x = p.mu_x + p.mu_xy * p.mu_xy / p.l_y;
    let delta_y = p.mu_y + p.mu_yx * p.mu_yx / p.l_x;
    if !(delta_x > 0.0 && delta_y > 0.0) {
        return Err(Error::DegenerateProblem { delta_x, delta_y });
    }
    Ok(ConditionNumbers {
        delta_x,
        delta_y,
        kappa_x: p.l_x / delta_x,
        kappa_y: p.l_y / delta_y,
        kappa_xy: p.l_xy * p.l_xy / (delta_x * delta_y),
    })
}

/// Outcome of the four strict inequalities on `π`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamInequalityReport {
    pub violations: Vec<&'static str>,
}

impl ParamInequalityReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_param_inequalities(p: &ProblemParams) -> ParamInequalityReport {
    let mut violations = Vec::new();
    if !(p.l_x > 4.0 * p.mu_x) {
        violations.push("L_x > 4μ_x");
    }
    if !(p.l_y > 4.0 * p.mu_y) {
        violations.push("L_y > 4μ_y");
    }
    let m = p.mu_xy.max(p.mu_yx);
    if !(p.l_xy > 18.0 * m.max((p.mu_x * p.mu_y).sqrt())) {
        violations.push("L_xy > 18·max{μ_xy, μ_yx, √(μ_x μ_y)}");
    }
    if !((p.l_x * p.l_y).sqrt() > 4.0 * m) {
        violations.push("√(L_x L_y) > 4·max{μ_xy, μ_yx}");
    }
    ParamInequalityReport { violations }
}

/// Condition numbers of a problem the solver is willing to run on.
pub fn check_solvable(p: &ProblemParams) -> Result<ConditionNumbers> {
    let cn = condition_numbers(p)?;
    let rep = validate_param_inequalities(p);
    if !rep.ok() {
        return Err(Error::AssumptionViolation(rep.violations.join("; ")));
    }
    Ok(cn)
}

pub type BoxedFn = Box<dyn SmoothFn + Send + Sync>;
pub type BoxedMap = Box<dyn LinearMap + Send + Sync>;

pub struct SaddlePointProblem {
    f: BoxedFn,
    g: BoxedFn,
    b: BoxedMap,
    params: ProblemParams,
}

impl std::fmt::Debug for SaddlePointProblem {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("SaddlePointProblem")
            .field("dim_x", &self.dim_x())
            .field("dim_y", &self.dim_y())
            .field("params", &self.params)
            .finish()
    }
}

impl SaddlePointProblem {
    pub fn new(f: BoxedFn, g: BoxedFn, b: BoxedMap, params: ProblemParams) -> Result<Self> {
        params.check()?;
        if b.cols() != f.dim() {
            return Err(Error::dims(f.dim(), b.cols()));
        }
        if b.rows() != g.dim() {
            return Err(Error::dims(g.dim(), b.rows()));
        }
        Ok(SaddlePointProblem { f, g, b, params })
    }

    pub fn f(&self) -> &(dyn SmoothFn + Send + Sync) {
        self.f.as_ref()
    }
    pub fn g(&self) -> &(dyn SmoothFn + Send + Sync) {
        self.g.as_ref()
    }
    pub fn b(&self) -> &(dyn LinearMap + Send + Sync) {
        self.b.as_ref()
    }
    pub fn params(&self) -> &ProblemParams {
        &self.params
    }
    pub fn dim_x(&self) -> usize {
        self.f.dim()
    }
    pub fn dim_y(&self) -> usize {
        self.g.dim()
    }
    pub fn condition_numbers(&self) -> Result<ConditionNumbers> {
        condition_numbers(&self.params)
    }

    /// Saddle operator `G(x, y) = (∇f(x) + Bᵀy, ∇g(y) − Bx)`, uncounted.
    pub fn operator(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let gx = add(&self.f.gradient(x), &self.b.adjoint(y));
        let gy = sub(&self.g.gradient(y), &self.b.forward(x));
        (gx, gy)
    }
}

pub fn kkt_residual(problem: &SaddlePointProblem, x: &[f64], y: &[f64]) -> f64 {
    let (gx, gy) = problem.operator(x, y);
    (norm_sq(&gx) + norm_sq(&gy)).sqrt()
}

// ---------------------------------------------------------------------------
// quadratic probing

/// `(H, q)` of a function assumed to be `½xᵀHx + qᵀx + const`. Unless the
/// function reports its form directly, the parts are recovered from
/// gradients at 0 and at the unit vectors, then checked for affinity along
/// three random lines.
pub fn quadratic_parts(h: &dyn SmoothFn) -> Result<(Mat, Vec<f64>)> {
    if let Some((hm, q)) = h.quadratic_form() {
        return Ok((hm.clone(), q.to_vec()));
    }
    let n = h.dim();
    let q = h.gradient(&vec![0.0; n]);
    let cols: Vec<Vec<f64>> = (0..n).map(|j| sub(&h.gradient(&numerics::unit(n, j)), &q)).collect();
    let mut hm = Mat::from_columns(n, &cols);

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let scale = hm.max_abs().max(norm(&q)).max(1.0);
    for _ in 0..3 {
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let t: f64 = rng.random_range(0.1..0.9);
        let mid = lerp(t, &b, &a);
        let expect = lerp(t, &h.gradient(&b), &h.gradient(&a));
        let got = h.gradient(&mid);
        let model = add(&hm.mul_vec(&mid), &q);
        let err = norm(&sub(&got, &expect)).max(norm(&sub(&got, &model)));
        if !(err <= 1e-8 * scale) {
            return Err(Error::NonQuadratic(format!("gradient is not affine (deviation {err:e})")));
        }
    }
    hm.symmetrize();
    Ok((hm, q))
}

// ---------------------------------------------------------------------------
// solution sets

/// `S = (x* + Kx) × (y* + Ky)` with orthonormal kernel bases.
#[derive(Clone, Debug)]
pub struct SolutionSet {
    pub x_star: Vec<f64>,
    pub y_star: Vec<f64>,
    pub x_kernel: Vec<Vec<f64>>,
    pub y_kernel: Vec<Vec<f64>>,
}

impl SolutionSet {
    pub fn project_x(&self, x: &[f64]) -> Vec<f64> {
        sub(x, &project_out(&sub(x, &self.x_star), &self.x_kernel))
    }

    pub fn project_y(&self, y: &[f64]) -> Vec<f64> {
        sub(y, &project_out(&sub(y, &self.y_star), &self.y_kernel))
    }

    pub fn dist_sq_x(&self, x: &[f64]) -> f64 {
        norm_sq(&project_out(&sub(x, &self.x_star), &self.x_kernel))
    }

    pub fn dist_sq_y(&self, y: &[f64]) -> f64 {
        norm_sq(&project_out(&sub(y, &self.y_star), &self.y_kernel))
    }

    /// `δ_x dist²(x; S_x) + δ_y dist²(y; S_y)`.
    pub fn r2(&self, cn: &ConditionNumbers, x: &[f64], y: &[f64]) -> f64 {
        cn.delta_x * self.dist_sq_x(x) + cn.delta_y * self.dist_sq_y(y)
    }
}

pub fn r2_metric(problem: &SaddlePointProblem, sol: &SolutionSet, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != problem.dim_x() {
        return Err(Error::dims(problem.dim_x(), x.len()));
    }
    if y.len() != problem.dim_y() {
        return Err(Error::dims(problem.dim_y(), y.len()));
    }
    Ok(sol.r2(&problem.condition_numbers()?, x, y))
}

/// Stacked optimality system `K [x; y] = r` of a quadratic problem.
pub fn kkt_system(problem: &SaddlePointProblem) -> Result<(Mat, Vec<f64>)> {
    let (hf, qf) = quadratic_parts(problem.f())?;
    let (hg, qg) = quadratic_parts(problem.g())?;
    let b = materialize(problem.b());
    let (dx, dy) = (problem.dim_x(), problem.dim_y());
    let mut k = Mat::zeros(dx + dy, dx + dy);
    for i in 0..dx {
        for j in 0..dx {
            k[(i, j)] = hf[(i, j)];
        }
        for j in 0..dy {
            k[(i, dx + j)] = b[(j, i)];
        }
    }
    for i in 0..dy {
        for j in 0..dx {
            k[(dx + i, j)] = -b[(i, j)];
        }
        for j in 0..dy {
            k[(dx + i, dx + j)] = hg[(i, j)];
        }
    }
    let mut r: Vec<f64> = qf.iter().map(|v| -v).collect();
    r.extend(qg.iter().map(|v| -v));
    Ok((k, r))
}

pub fn solve_exact_quadratic(problem: &SaddlePointProblem) -> Result<SolutionSet> {
    let (k, r) = kkt_system(problem)?;
    let mut z = match numerics::solve_linear(&k, &r) {
        Ok(z) => z,
        Err(Error::Singular { .. }) => numerics::lstsq_min_norm(&k, &r)?,
        Err(e) => return Err(e),
    };
    // one refinement step
    let res = sub(&r, &k.mul_vec(&z));
    let dz = numerics::lstsq_min_norm(&k, &res)?;
    numerics::axpy(1.0, &dz, &mut z);
    if !numerics::all_finite(&z) {
        return Err(Error::NonFinite("solve_exact_quadratic".into()));
    }

    let dx = problem.dim_x();
    let y_star = z.split_off(dx);
    let x_star = z;
    let p = problem.params();
    let b = materialize(problem.b());
    let x_kernel = if p.mu_x == 0.0 { numerics::kernel_basis(&b) } else { Vec::new() };
    let y_kernel = if p.mu_y == 0.0 { numerics::kernel_basis(&b.transpose()) } else { Vec::new() };
    Ok(SolutionSet { x_star, y_star, x_kernel, y_kernel })
}

// ---------------------------------------------------------------------------
// measured constants

/// Spectral quantities of a quadratic problem, as measured.
#[derive(Clone, Debug)]
pub struct MeasuredConstants {
    pub f_eig_max: f64,
    pub f_eig_min: f64,
    pub g_eig_max: f64,
    pub g_eig_min: f64,
    pub sigma_max: f64,
    /// Smallest singular value of `B` counting zeros (`λ_min(BᵀB)^½`).
    pub sigma_min_x: f64,
    /// Same for `Bᵀ`.
    pub sigma_min_y: f64,
    /// Smallest positive singular value.
    pub sigma_min_pos: f64,
    /// `∇f(x) ∈ range Bᵀ` for all x.
    pub grad_f_in_range_bt: bool,
    /// `∇g(y) ∈ range B` for all y.
    pub grad_g_in_range_b: bool,
}

fn in_range_complement(h: &Mat, q: &[f64], kernel: &[Vec<f64>]) -> bool {
    let scale = h.max_abs().max(norm(q)).max(1.0);
    kernel.iter().all(|k| norm(&h.mul_vec(k)) <= 1e-9 * scale && numerics::dot(q, k).abs() <= 1e-9 * scale)
}

pub fn measure_constants(problem: &SaddlePointProblem) -> Result<MeasuredConstants> {
    let (hf, qf) = quadratic_parts(problem.f())?;
    let (hg, qg) = quadratic_parts(problem.g())?;
    let ef = numerics::sym_eigs(&hf)?;
    let eg = numerics::sym_eigs(&hg)?;
    let b = materialize(problem.b());
    let svd = JacobiSvd::new(&b);
    let smax = svd.sigma_max();
    let cut = RANK_TOL * smax;
    let pos_min = svd.sigma.iter().copied().filter(|s| *s > cut).fold(f64::INFINITY, f64::min);
    // with a trivial kernel on one side, σ_min over min(rows, cols) values is λ_min^½ there
    let smin = numerics::singular_values(&b).last().copied().unwrap_or(0.0);
    let kx = numerics::kernel_basis(&b);
    let ky = numerics::kernel_basis(&b.transpose());
    Ok(MeasuredConstants {
        f_eig_max: ef[0],
        f_eig_min: *ef.last().unwrap(),
        g_eig_max: eg[0],
        g_eig_min: *eg.last().unwrap(),
        sigma_max: smax,
        sigma_min_x: if kx.is_empty() { smin } else { 0.0 },
        sigma_min_y: if ky.is_empty() { smin } else { 0.0 },
        sigma_min_pos: if pos_min.is_finite() { pos_min } else { 0.0 },
        grad_f_in_range_bt: in_range_complement(&hf, &qf, &kx),
        grad_g_in_range_b: in_range_complement(&hg, &qg, &ky),
    })
}

/// Checks the declared `π` against measured spectra (Assumptions on f, g, B).
/// Returns the list of violated inequalities; empty means consistent.
pub fn spectral_violations(problem: &SaddlePointProblem, slack: f64) -> Result<Vec<String>> {
    let m = measure_constants(problem)?;
    let p = problem.params();
    let mut v = Vec::new();
    let le = |a: f64, b: f64| a <= b + slack * (1.0 + b.abs());
    if !le(m.f_eig_max, p.l_x) {
        v.push(format!("λ_max(∇²f) = {} exceeds L_x = {}", m.f_eig_max, p.l_x));
    }
    if !le(p.mu_x, m.f_eig_min) {
        v.push(format!("μ_x = {} exceeds λ_min(∇²f) = {}", p.mu_x, m.f_eig_min));
    }
    if !le(m.g_eig_max, p.l_y) {
        v.push(format!("λ_max(∇²g) = {} exceeds L_y = {}", m.g_eig_max, p.l_y));
    }
    if !le(p.mu_y, m.g_eig_min) {
        v.push(format!("μ_y = {} exceeds λ_min(∇²g) = {}", p.mu_y, m.g_eig_min));
    }
    if !le(m.sigma_max, p.l_xy) {
        v.push(format!("σ_max(B) = {} exceeds L_xy = {}", m.sigma_max, p.l_xy));
    }
    let bx = if m.grad_f_in_range_bt { m.sigma_min_pos } else { m.sigma_min_x };
    if !le(p.mu_xy, bx) {
        v.push(format!("μ_xy = {} exceeds admissible σ = {}", p.mu_xy, bx));
    }
    let by = if m.grad_g_in_range_b { m.sigma_min_pos } else { m.sigma_min_y };
    if !le(p.mu_yx, by) {
        v.push(format!("μ_yx = {} exceeds admissible σ = {}", p.mu_yx, by));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::Quadratic;

    fn params(l_x: f64, l_y: f64, l_xy: f64, mu_x: f64, mu_y: f64, mu_xy: f64, mu_yx: f64) -> ProblemParams {
        ProblemParams::new(l_x, l_y, l_xy, mu_x, mu_y, mu_xy, mu_yx).unwrap()
    }

    fn simple(qx: Vec<f64>, b: Mat, p: ProblemParams) -> SaddlePointProblem {
        let dy = b.rows();
        SaddlePointProblem::new(
            Box::new(Quadratic::isotropic(1.0, qx)),
            Box::new(Quadratic::isotropic(1.0, vec![0.0; dy])),
            Box::new(b),
            p,
        )
        .unwrap()
    }

    #[test]
    fn condition_number_examples() {
        let cn = condition_numbers(&params(100.0, 50.0, 30.0, 1.0, 2.0, 0.0, 0.0)).unwrap();
        assert_eq!((cn.delta_x, cn.delta_y), (1.0, 2.0));
        assert_eq!((cn.kappa_x, cn.kappa_y, cn.kappa_xy), (100.0, 25.0, 450.0));

        let cn = condition_numbers(&params(4.0, 4.0, 19.0, 0.0, 0.0, 1.0, 1.0)).unwrap();
        assert_eq!((cn.delta_x, cn.delta_y), (0.25, 0.25));
        assert_eq!((cn.kappa_x, cn.kappa_y, cn.kappa_xy), (16.0, 16.0, 5776.0));

        let p = params(4.0, 4.0, 19.0, 0.0, 1.0, 0.0, 0.0);
        assert!(matches!(condition_numbers(&p), Err(Error::DegenerateProblem { .. })));
    }

    #[test]
    fn params_invariants() {
        assert!(ProblemParams::new(1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(ProblemParams::new(2.0, 2.0, 5.0, 0.0, 0.0, 1.0, 2.0).is_err());
        assert!(ProblemParams::new(2.0, 2.0, 5.0, 0.0, 0.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn param_inequality_examples() {
        // μ_x = μ_y = 1, max = 1: L_x = L_y = 5, L_xy = 19, √(L_x L_y) = 5
        assert!(validate_param_inequalities(&params(5.0, 5.0, 19.0, 1.0, 1.0, 1.0, 1.0)).ok());
        let rep = validate_param_inequalities(&params(4.0, 5.0, 19.0, 1.0, 1.0, 0.0, 0.0));
        assert_eq!(rep.violations, vec!["L_x > 4μ_x"]);
        assert!(validate_param_inequalities(&params(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0)).ok());
    }

    #[test]
    fn kkt_residual_examples() {
        let p = params(1.5, 1.5, 2.0, 1.0, 1.0, 0.0, 0.0);
        let prob = simple(vec![0.0], Mat::identity(1), p);
        assert_eq!(kkt_residual(&prob, &[0.0], &[0.0]), 0.0);
        assert!((kkt_residual(&prob, &[1.0], &[0.0]) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exact_solution_examples() {
        let p = params(1.5, 1.5, 2.0, 1.0, 1.0, 0.0, 0.0);
        let prob = simple(vec![-1.0, 0.0], Mat::identity(2), p);
        let sol = solve_exact_quadratic(&prob).unwrap();
        assert!((sol.x_star[0] - 0.5).abs() < 1e-14 && sol.x_star[1].abs() < 1e-14);
        assert!((sol.y_star[0] - 0.5).abs() < 1e-14 && sol.y_star[1].abs() < 1e-14);
        assert!(sol.x_kernel.is_empty() && sol.y_kernel.is_empty());
        assert!(kkt_residual(&prob, &sol.x_star, &sol.y_star) <= 1e-12);

        let prob = simple(vec![0.0, 0.0], Mat::identity(2), p);
        let sol = solve_exact_quadratic(&prob).unwrap();
        assert!(norm(&sol.x_star) < 1e-15 && norm(&sol.y_star) < 1e-15);
    }

    #[test]
    fn exact_solution_with_kernel() {
        // f = 0 on R², g = ½y², B = [1 1]: S_x is the line x1 + x2 = 0
        let p = params(1.0, 2.0, 2.0, 0.0, 1.0, 2f64.sqrt(), 0.0);
        let prob = SaddlePointProblem::new(
            Box::new(Quadratic::isotropic(0.0, vec![0.0; 2])),
            Box::new(Quadratic::isotropic(1.0, vec![0.0])),
            Box::new(Mat::from_rows(&[vec![1.0, 1.0]]).unwrap()),
            p,
        )
        .unwrap();
        let sol = solve_exact_quadratic(&prob).unwrap();
        assert_eq!(sol.x_kernel.len(), 1);
        assert!(kkt_residual(&prob, &sol.x_star, &sol.y_star) <= 1e-12);
        assert!(sol.dist_sq_x(&[3.0, -3.0]) < 1e-24);
        assert!((sol.dist_sq_x(&[1.0, 1.0]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn r2_examples() {
        let cn = condition_numbers(&params(10.0, 10.0, 30.0, 1.0, 2.0, 0.0, 0.0)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sol =
            SolutionSet { x_star: vec![1.0, 2.0], y_star: vec![0.0], x_kernel: vec![vec![s, s]], y_kernel: vec![] };
        assert_eq!(sol.r2(&cn, &[1.0, 2.0], &[0.0]), 0.0);
        assert!((sol.r2(&cn, &[1.0 + s, 2.0 - s], &[0.0]) - 1.0).abs() < 1e-14);
        assert!(sol.r2(&cn, &[1.0 + 5.0 * s, 2.0 + 5.0 * s], &[0.0]) < 1e-24);
    }

    struct SoftPlus;
    impl SmoothFn for SoftPlus {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &[f64]) -> f64 {
            (1.0 + x[0].exp()).ln()
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            vec![1.0 / (1.0 + (-x[0]).exp())]
        }
        fn smoothness(&self) -> f64 {
            0.25
        }
        fn strong_convexity(&self) -> f64 {
            0.0
        }
    }

    #[test]
    fn non_quadratic_detected() {
        assert!(matches!(quadratic_parts(&SoftPlus), Err(Error::NonQuadratic(_))));
        let p = params(1.0, 2.0, 2.0, 0.0, 1.0, 1.0, 0.0);
        let prob = SaddlePointProblem::new(
            Box::new(SoftPlus),
            Box::new(Quadratic::isotropic(1.0, vec![0.0])),
            Box::new(Mat::identity(1)),
            p,
        )
        .unwrap();
        assert!(matches!(solve_exact_quadratic(&prob), Err(Error::NonQuadratic(_))));
    }

    /// A quadratic seen only through its oracle.
    struct Opaque(Quadratic);
    impl SmoothFn for Opaque {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn value(&self, x: &[f64]) -> f64 {
            self.0.value(x)
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            self.0.gradient(x)
        }
        fn smoothness(&self) -> f64 {
            self.0.smoothness()
        }
        fn strong_convexity(&self) -> f64 {
            0.0
        }
    }

    #[test]
    fn probed_parts_match_declared() {
        let h = Mat::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let q = Quadratic::new(h.clone(), vec![0.3, -0.7]).unwrap();
        let (hm, lin) = quadratic_parts(&Opaque(q)).unwrap();
        assert!((0..2).all(|i| (0..2).all(|j| (hm[(i, j)] - h[(i, j)]).abs() < 1e-14)));
        assert_eq!(lin, vec![0.3, -0.7]);
    }
}
