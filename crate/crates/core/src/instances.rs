//! Test problem generators: random quadratics with prescribed spectra and
//! the structured worst-case families (chain, coupled block, bidiagonal).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{self, Mat};
use crate::oracles::Quadratic;
use crate::saddle::{spectral_violations, validate_param_inequalities, ProblemParams, SaddlePointProblem};

/// Slack used when checking a generated problem against its declared `π`.
pub const SPECTRAL_SLACK: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceKind {
    /// `rank` defaults to `min(dim_x, dim_y)`.
    RandomQuadratic {
        dim_x: usize,
        dim_y: usize,
        rank: Option<usize>,
    },
    ChainGradient {
        d: usize,
    },
    CoupledBlock {
        d: usize,
    },
    BilinearTridiag {
        d: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub params: ProblemParams,
    /// Magnitude of the linear terms.
    pub a: f64,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(kind: InstanceKind, params: ProblemParams) -> Self {
        InstanceSpec { kind, params, a: 1.0, seed: 42 }
    }
}

/// Generates and validates the instance.
pub fn generate(spec: &InstanceSpec) -> Result<SaddlePointProblem> {
    let prob = match spec.kind {
        InstanceKind::RandomQuadratic { dim_x, dim_y, rank } => {
            gen_random_quadratic(dim_x, dim_y, rank, &spec.params, spec.a, spec.seed)?
        }
        InstanceKind::ChainGradient { d } => gen_chain_gradient(&spec.params, d, spec.a)?,
        InstanceKind::CoupledBlock { d } => gen_coupled_block(&spec.params, d, spec.a)?,
        InstanceKind::BilinearTridiag { d } => gen_bilinear_tridiag(&spec.params, d, spec.a)?,
    };
    let v = spectral_violations(&prob, SPECTRAL_SLACK)?;
    if !v.is_empty() {
        return Err(Error::InvalidInstance(format!("generated problem violates its parameters: {}", v.join("; "))));
    }
    Ok(prob)
}

fn require_param_inequalities(p: &ProblemParams) -> Result<()> {
    let rep = validate_param_inequalities(p);
    if !rep.ok() {
        return Err(Error::InvalidInstance(format!("parameters violate {}", rep.violations.join("; "))));
    }
    Ok(())
}

fn assemble(hf: Mat, qf: Vec<f64>, hg: Mat, qg: Vec<f64>, b: Mat, p: ProblemParams) -> Result<SaddlePointProblem> {
    SaddlePointProblem::new(Box::new(Quadratic::new(hf, qf)?), Box::new(Quadratic::new(hg, qg)?), Box::new(b), p)
}

// ---------------------------------------------------------------------------
// random quadratics

/// Orthonormal columns from Gram-Schmidt on a Gaussian matrix.
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> Mat {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for c in &cols {
                let d = numerics::dot(c, &v);
                numerics::axpy(-d, c, &mut v);
            }
        }
        let nv = numerics::norm(&v);
        if nv > 1e-8 {
            cols.push(numerics::scaled(1.0 / nv, &v));
        }
    }
    Mat::from_columns(n, &cols)
}

/// `m` values in `[lo, hi]`, both endpoints attained when `m ≥ 2`, the rest
/// uniform. A single value is `hi`.
fn spread(lo: f64, hi: f64, m: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut v = Vec::with_capacity(m);
    if m == 0 {
        return v;
    }
    v.push(hi);
    for _ in 1..m.saturating_sub(1) {
        v.push(rng.random_range(lo..=hi));
    }
    if m >= 2 {
        v.push(lo);
    }
    v
}

/// `W diag(λ) Wᵀ` for orthonormal columns `W`.
fn frame_quadratic(w: &Mat, lambda: &[f64], n: usize) -> Mat {
    let mut h = Mat::zeros(n, n);
    for (k, &l) in lambda.iter().enumerate() {
        for i in 0..n {
            let wi = w[(i, k)] * l;
            if wi == 0.0 {
                continue;
            }
            for j in 0..n {
                h[(i, j)] += wi * w[(j, k)];
            }
        }
    }
    h.symmetrize();
    h
}

fn first_columns(m: &Mat, r: usize) -> Mat {
    let cols: Vec<Vec<f64>> = (0..r).map(|j| m.column(j)).collect();
    Mat::from_columns(m.rows(), &cols)
}

/// One side (`f` or `g`) of a random instance. On a restricted side the
/// function lives in the span of the first `r` columns of `frame`.
#[allow(clippy::too_many_arguments)]
fn random_side(
    n: usize,
    r: usize,
    frame: &Mat,
    restricted: bool,
    mu: f64,
    l: f64,
    a: f64,
    rng: &mut impl Rng,
) -> (Mat, Vec<f64>) {
    if restricted {
        let rot = random_orthogonal(r, rng);
        let w = first_columns(frame, r).matmul(&rot).expect("shapes agree");
        let lam = spread(0.0, l, r, rng);
        let c: Vec<f64> = (0..r).map(|_| a * rng.random_range(-1.0..1.0)).collect();
        (frame_quadratic(&w, &lam, n), w.mul_vec(&c))
    } else {
        let w = random_orthogonal(n, rng);
        let lam = spread(mu, l, n, rng);
        let q = (0..n).map(|_| a * rng.random_range(-1.0..1.0)).collect();
        (frame_quadratic(&w, &lam, n), q)
    }
}

/// Quadratic `f`, `g` with spectra spanning `[μ, L]` and `B = U diag(σ) Vᵀ`
/// with `σ` spanning `[max(μ_xy, μ_yx), L_xy]`. With `rank < dim_x` and
/// `μ_xy > 0`, `f` is placed in `range Bᵀ` (this needs `μ_x = 0`);
/// symmetrically for `g`.
pub fn gen_random_quadratic(
    dim_x: usize,
    dim_y: usize,
    rank: Option<usize>,
    p: &ProblemParams,
    a: f64,
    seed: u64,
) -> Result<SaddlePointProblem> {
    require_param_inequalities(p)?;
    if dim_x == 0 || dim_y == 0 {
        return Err(Error::InvalidInstance("dimensions must be positive".into()));
    }
    let r = rank.unwrap_or(dim_x.min(dim_y));
    if r == 0 || r > dim_x.min(dim_y) {
        return Err(Error::InvalidInstance(format!("rank {r} out of range for {dim_y}x{dim_x}")));
    }
    let x_restricted = r < dim_x && p.mu_xy > 0.0;
    let y_restricted = r < dim_y && p.mu_yx > 0.0;
    if x_restricted && p.mu_x > 0.0 {
        return Err(Error::InvalidInstance("ker B is nontrivial: mu_xy > 0 needs mu_x = 0".into()));
    }
    if y_restricted && p.mu_y > 0.0 {
        return Err(Error::InvalidInstance("ker Bᵀ is nontrivial: mu_yx > 0 needs mu_y = 0".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_orthogonal(dim_y, &mut rng);
    let v = random_orthogonal(dim_x, &mut rng);
    let sigma = spread(p.mu_xy.max(p.mu_yx), p.l_xy, r, &mut rng);
    let mut b = Mat::zeros(dim_y, dim_x);
    for (k, &s) in sigma.iter().enumerate() {
        for i in 0..dim_y {
            for j in 0..dim_x {
                b[(i, j)] += s * u[(i, k)] * v[(j, k)];
            }
        }
    }
    let (hf, qf) = random_side(dim_x, r, &v, x_restricted, p.mu_x, p.l_x, a, &mut rng);
    let (hg, qg) = random_side(dim_y, r, &u, y_restricted, p.mu_y, p.l_y, a, &mut rng);
    let f = Quadratic::with_constants(hf, qf, p.l_x, p.mu_x)?;
    let g = Quadratic::with_constants(hg, qg, p.l_y, p.mu_y)?;
    SaddlePointProblem::new(Box::new(f), Box::new(g), Box::new(b), *p)
}

// ---------------------------------------------------------------------------
// chain matrices

/// `F₁` with rows `(e_{2i-1} - e_{2i})/√2` and `F₂` with rows
/// `(e_{2i} - e_{2i+1})/√2`, 1-based.
pub fn gen_chain_matrices(d: usize) -> Result<(Mat, Mat)> {
    if d < 2 {
        return Err(Error::InvalidInstance(format!("chain matrices need d >= 2, got {d}")));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut f1 = Mat::zeros(d / 2, d);
    for i in 0..d / 2 {
        f1[(i, 2 * i)] = s;
        f1[(i, 2 * i + 1)] = -s;
    }
    let mut f2 = Mat::zeros((d - 1) / 2, d);
    for i in 0..(d - 1) / 2 {
        f2[(i, 2 * i + 1)] = s;
        f2[(i, 2 * i + 2)] = -s;
    }
    Ok((f1, f2))
}

/// `½` times the `(d-1)×d` bidiagonal with `1, -1`.
pub fn chain_f(d: usize) -> Result<Mat> {
    if d < 2 {
        return Err(Error::InvalidInstance(format!("chain matrix needs d >= 2, got {d}")));
    }
    let mut f = Mat::zeros(d - 1, d);
    for i in 0..d - 1 {
        f[(i, i)] = 0.5;
        f[(i, i + 1)] = -0.5;
    }
    Ok(f)
}

/// `c·I + s·FᵀF`
fn identity_plus_gram(n: usize, c: f64, s: f64, f: &Mat) -> Mat {
    let mut h = f.gram();
    h.scale(s);
    for i in 0..n {
        h[(i, i)] += c;
    }
    h
}

/// Chain instance. With `μ_xy > 0`: `f = μ_x/2‖x‖² + (L_x−μ_x)/2‖Fx‖² − A x₁`,
/// `g = L_y/2‖y‖²`, `B = μ_xy I`. With `μ_xy = 0` (needs `μ_yx > 0`):
/// `x = (u, v) ∈ R^{d+1}`, the chain acts on `u`, `y ∈ R` and
/// `B = μ_yx [0 … 0 1]`.
pub fn gen_chain_gradient(p: &ProblemParams, d: usize, a: f64) -> Result<SaddlePointProblem> {
    require_param_inequalities(p)?;
    let f = chain_f(d)?;
    if p.mu_xy > 0.0 {
        let hf = identity_plus_gram(d, p.mu_x, p.l_x - p.mu_x, &f);
        let mut qf = vec![0.0; d];
        qf[0] = -a;
        let mut hg = Mat::identity(d);
        hg.scale(p.l_y);
        let mut b = Mat::identity(d);
        b.scale(p.mu_xy);
        assemble(hf, qf, hg, vec![0.0; d], b, *p)
    } else {
        if !(p.mu_yx > 0.0) {
            return Err(Error::InvalidInstance("chain instance with mu_xy = 0 needs mu_yx > 0".into()));
        }
        let n = d + 1;
        let gram = f.gram();
        let mut hf = Mat::identity(n);
        hf.scale(p.mu_x);
        for i in 0..d {
            for j in 0..d {
                hf[(i, j)] += (p.l_x - p.mu_x) * gram[(i, j)];
            }
        }
        let mut qf = vec![0.0; n];
        qf[0] = -a;
        let hg = Mat::from_diag(&[p.l_y]);
        let mut b = Mat::zeros(1, n);
        b[(0, d)] = p.mu_yx;
        assemble(hf, qf, hg, vec![0.0], b, *p)
    }
}

// ---------------------------------------------------------------------------
// coupled block

/// Block coupling matrix: a `γ` row over columns `1..n` (omitted when
/// `gamma` is `None`), `n` rows `β e_i − β e_{n+1}`, `n−1` rows
/// `α e_{n+j} − α e_{n+j+1}` and `n` rows `−β e_{2n} + β e_{2n+i}`.
pub fn coupling_matrix(n: usize, alpha: f64, beta: f64, gamma: Option<f64>) -> Result<Mat> {
    if n < 2 {
        return Err(Error::InvalidInstance(format!("coupling matrix needs n >= 2, got {n}")));
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(3 * n);
    let blank = || vec![0.0; 3 * n];
    if let Some(g) = gamma {
        let mut r = blank();
        r[..n].iter_mut().for_each(|v| *v = g);
        rows.push(r);
    }
    for i in 0..n {
        let mut r = blank();
        r[i] = beta;
        r[n] = -beta;
        rows.push(r);
    }
    for j in 0..n - 1 {
        let mut r = blank();
        r[n + j] = alpha;
        r[n + j + 1] = -alpha;
        rows.push(r);
    }
    for i in 0..n {
        let mut r = blank();
        r[2 * n - 1] = -beta;
        r[2 * n + i] = beta;
        rows.push(r);
    }
    Mat::from_rows(&rows)
}

/// `(n, α, β, γ)` for the coupled-block family.
pub fn coupled_block_constants(p: &ProblemParams) -> Result<(usize, f64, f64, f64)> {
    if !(p.mu_yx > 0.0) {
        return Err(Error::InvalidInstance("coupled block instance needs mu_yx > 0".into()));
    }
    let n = (p.l_xy / (6.0 * p.mu_yx)).floor();
    if n < 2.0 {
        return Err(Error::InvalidInstance(format!("block count n = {n} < 2")));
    }
    let n = n as usize;
    Ok((n, p.l_xy / 2.0, p.l_xy / n as f64, 2.0 * p.mu_xy / (n as f64).sqrt()))
}

pub fn gen_coupled_block(p: &ProblemParams, d: usize, a: f64) -> Result<SaddlePointProblem> {
    require_param_inequalities(p)?;
    if p.mu_xy > 0.0 && p.mu_xy != p.mu_yx {
        return Err(Error::InvalidInstance("coupled block with mu_xy > 0 needs mu_xy = mu_yx".into()));
    }
    let (n, alpha, beta, gamma) = coupled_block_constants(p)?;
    let (f1, f2) = gen_chain_matrices(d)?;
    let dt = p.mu_x + 4.0 * p.mu_xy * p.mu_xy / p.l_y;
    let nx = 3 * n;
    let e = if p.mu_xy > 0.0 {
        coupling_matrix(n, alpha, beta, Some(gamma))?
    } else {
        coupling_matrix(n, alpha, beta, None)?
    };
    let ny = e.rows();

    let block1 = identity_plus_gram(d, p.mu_x, p.l_x - dt, &f1);
    let block2 = identity_plus_gram(d, dt, 0.0, &f1);
    let block3 = identity_plus_gram(d, dt, p.l_x - dt, &f2);
    let mut hf = Mat::zeros(nx * d, nx * d);
    let mut qf = vec![0.0; nx * d];
    for blk in 0..nx {
        let h = if blk < n {
            &block1
        } else if blk < 2 * n {
            &block2
        } else {
            qf[blk * d] = -a;
            &block3
        };
        for i in 0..d {
            for j in 0..d {
                hf[(blk * d + i, blk * d + j)] = h[(i, j)];
            }
        }
    }
    let l_first = if p.mu_xy > 0.0 { p.l_y } else { p.mu_y };
    let mut gd = vec![p.mu_y; ny * d];
    gd[..d].iter_mut().for_each(|v| *v = l_first);
    let hg = Mat::from_diag(&gd);
    assemble(hf, qf, hg, vec![0.0; ny * d], e.kron_identity(d), *p)
}

/// Measured extreme squared singular values against the block-matrix bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub sigma2_min: f64,
    pub sigma2_max: f64,
    pub lower: f64,
    pub upper: f64,
    pub slack: f64,
}

impl SpectrumReport {
    pub fn lower_bound_ok(&self) -> bool {
        self.sigma2_min >= self.lower - self.slack * self.lower.max(1.0)
    }
    pub fn upper_bound_ok(&self) -> bool {
        self.sigma2_max <= self.upper + self.slack * self.upper.max(1.0)
    }
    pub fn ok(&self) -> bool {
        self.lower_bound_ok() && self.upper_bound_ok()
    }
}

/// Squared singular values from the eigenvalues of `EEᵀ`; zero eigenvalues
/// (relative to the largest) are skipped so `E′` reports `σ⁺_min`.
fn extreme_sigma2(e: &Mat) -> Result<(f64, f64)> {
    let eigs = numerics::sym_eigs(&e.outer_gram())?;
    let max = eigs[0];
    let min = eigs.iter().copied().filter(|v| *v > numerics::RANK_TOL * max).fold(f64::INFINITY, f64::min);
    Ok((min, max))
}

/// Bounds `min{nγ²/4, β²/36, α²/(9n²)} ≤ σ² ≤ max{2nγ², 2(n+1)β², 4α²}`;
/// with `γ = 0` the `γ` terms are dropped and the lower bound is on `σ⁺_min`.
pub fn validate_spectrum_e(e: &Mat, alpha: f64, beta: f64, gamma: f64, n: usize, slack: f64) -> Result<SpectrumReport> {
    let nf = n as f64;
    let mut lower = (beta * beta / 36.0).min(alpha * alpha / (9.0 * nf * nf));
    let mut upper = (2.0 * (nf + 1.0) * beta * beta).max(4.0 * alpha * alpha);
    if gamma != 0.0 {
        lower = lower.min(nf * gamma * gamma / 4.0);
        upper = upper.max(2.0 * nf * gamma * gamma);
    }
    let (sigma2_min, sigma2_max) = extreme_sigma2(e)?;
    Ok(SpectrumReport { sigma2_min, sigma2_max, lower, upper, slack })
}

// ---------------------------------------------------------------------------
// bidiagonal bilinear instance

/// `½` times the upper bidiagonal `d×d` matrix with `L_xy + μ̄` on the
/// diagonal and `−(L_xy − μ̄)` above it.
pub fn bilinear_tridiag_matrix(d: usize, l_xy: f64, mu_bar: f64) -> Result<Mat> {
    if d < 1 {
        return Err(Error::InvalidInstance("d must be positive".into()));
    }
    let (al, be) = (l_xy + mu_bar, l_xy - mu_bar);
    let mut b = Mat::zeros(d, d);
    for i in 0..d {
        b[(i, i)] = 0.5 * al;
        if i + 1 < d {
            b[(i, i + 1)] = -0.5 * be;
        }
    }
    Ok(b)
}

/// Squared singular value bounds `μ̄² ≤ σ² ≤ L_xy²` as a report.
pub fn validate_bilinear_tridiag(b: &Mat, l_xy: f64, mu_bar: f64, slack: f64) -> Result<SpectrumReport> {
    let (sigma2_min, sigma2_max) = extreme_sigma2(b)?;
    Ok(SpectrumReport { sigma2_min, sigma2_max, lower: mu_bar * mu_bar, upper: l_xy * l_xy, slack })
}

pub fn gen_bilinear_tridiag(p: &ProblemParams, d: usize, a: f64) -> Result<SaddlePointProblem> {
    require_param_inequalities(p)?;
    if !(p.mu_x > 0.0 && p.mu_y > 0.0) {
        return Err(Error::InvalidInstance("bidiagonal instance needs mu_x, mu_y > 0".into()));
    }
    if d < 2 {
        return Err(Error::InvalidInstance(format!("bidiagonal instance needs d >= 2, got {d}")));
    }
    let mu_bar = p.mu_xy.max(p.mu_yx);
    let b = bilinear_tridiag_matrix(d, p.l_xy, mu_bar)?;
    let mut hf = Mat::identity(d);
    hf.scale(p.mu_x);
    let mut qf = vec![0.0; d];
    qf[0] = -a;
    let mut hg = Mat::identity(d);
    hg.scale(p.mu_y);
    assemble(hf, qf, hg, vec![0.0; d], b, *p)
}

// ---------------------------------------------------------------------------
// named presets

pub const PRESETS: [&str; 8] = [
    "scsc_small",
    "sc_c_small",
    "cc_small",
    "kernel_small",
    "coupled_block_n3",
    "bilinear_tridiag_d8",
    "chain_gradient_d8",
    "bilinear_canned",
];

fn pp(l_x: f64, l_y: f64, l_xy: f64, mu_x: f64, mu_y: f64, mu_xy: f64, mu_yx: f64) -> ProblemParams {
    ProblemParams::new(l_x, l_y, l_xy, mu_x, mu_y, mu_xy, mu_yx).expect("preset parameters are valid")
}

/// Specification of a named preset. `bilinear_canned` is not expressible
/// as a spec; see [`crate::baselines::canned_bilinear`].
pub fn preset_spec(name: &str, seed: u64) -> Option<InstanceSpec> {
    use InstanceKind::*;
    let (kind, params) = match name {
        "scsc_small" => (RandomQuadratic { dim_x: 6, dim_y: 6, rank: None }, pp(10.0, 10.0, 20.0, 1.0, 1.0, 0.0, 0.0)),
        "sc_c_small" => (RandomQuadratic { dim_x: 6, dim_y: 4, rank: None }, pp(10.0, 10.0, 20.0, 1.0, 0.0, 0.0, 1.0)),
        "cc_small" => (RandomQuadratic { dim_x: 5, dim_y: 5, rank: None }, pp(10.0, 10.0, 19.0, 0.0, 0.0, 1.0, 1.0)),
        "kernel_small" => {
            (RandomQuadratic { dim_x: 6, dim_y: 4, rank: None }, pp(10.0, 10.0, 20.0, 0.0, 1.0, 1.0, 1.0))
        }
        "coupled_block_n3" => (CoupledBlock { d: 4 }, pp(10.0, 10.0, 19.0, 0.1, 0.1, 1.0, 1.0)),
        "bilinear_tridiag_d8" => (BilinearTridiag { d: 8 }, pp(5.0, 5.0, 19.0, 1.0, 1.0, 1.0, 1.0)),
        "chain_gradient_d8" => (ChainGradient { d: 8 }, pp(10.0, 10.0, 19.0, 0.5, 1.0, 1.0, 1.0)),
        _ => return None,
    };
    Some(InstanceSpec { kind, params, a: 1.0, seed })
}

pub fn preset(name: &str, seed: u64) -> Result<SaddlePointProblem> {
    if name == "bilinear_canned" {
        return crate::baselines::canned_bilinear();
    }
    match preset_spec(name, seed) {
        Some(spec) => generate(&spec),
        None => Err(Error::Config { field: "instance".into(), msg: format!("unknown preset `{name}`") }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saddle::{measure_constants, quadratic_parts};

    #[test]
    fn chain_matrices_small() {
        let (f1, f2) = gen_chain_matrices(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!((f1.rows(), f1.cols()), (1, 2));
        assert_eq!(f1.row(0), &[s, -s]);
        assert_eq!(f2.rows(), 0);
        assert!(gen_chain_matrices(1).is_err());
    }

    #[test]
    fn chain_matrices_have_orthonormal_rows() {
        for d in 2..=10 {
            let (f1, f2) = gen_chain_matrices(d).unwrap();
            for f in [&f1, &f2] {
                let g = f.outer_gram();
                for i in 0..g.rows() {
                    for j in 0..g.cols() {
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!((g[(i, j)] - want).abs() < 1e-15);
                    }
                }
            }
            assert!((numerics::singular_values(&f1)[0] - 1.0).abs() < 1e-12);
            if d >= 3 {
                assert!((numerics::singular_values(&f2)[0] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coupling_constants_for_three_blocks() {
        let p = pp(10.0, 10.0, 19.0, 0.1, 0.1, 1.0, 1.0);
        let (n, a, b, g) = coupled_block_constants(&p).unwrap();
        assert_eq!(n, 3);
        assert_eq!(a, 9.5);
        assert!((b - 19.0 / 3.0).abs() < 1e-15);
        assert!((g - 2.0 / 3f64.sqrt()).abs() < 1e-15);
        let e = coupling_matrix(n, a, b, Some(g)).unwrap();
        assert_eq!((e.rows(), e.cols()), (9, 9));
        let e2 = coupling_matrix(n, a, b, None).unwrap();
        assert_eq!((e2.rows(), e2.cols()), (8, 9));
    }

    #[test]
    fn block_unit_constants() {
        let e = coupling_matrix(3, 1.0, 1.0, Some(1.0)).unwrap();
        let rep = validate_spectrum_e(&e, 1.0, 1.0, 1.0, 3, 1e-8).unwrap();
        assert!((rep.lower - 1.0 / 81.0).abs() < 1e-15);
        assert_eq!(rep.upper, 8.0);
        assert!(rep.ok(), "{rep:?}");
    }

    #[test]
    fn bidiagonal_entries() {
        let b = bilinear_tridiag_matrix(3, 19.0, 1.0).unwrap();
        assert_eq!(b.row(0), &[10.0, -9.0, 0.0]);
        assert_eq!(b.row(2), &[0.0, 0.0, 10.0]);
    }

    #[test]
    fn scalar_random_instance() {
        let p = pp(10.0, 10.0, 20.0, 1.0, 1.0, 0.0, 0.0);
        let prob = gen_random_quadratic(1, 1, None, &p, 1.0, 7).unwrap();
        let (hf, _) = quadratic_parts(prob.f()).unwrap();
        assert!((hf[(0, 0)] - 10.0).abs() < 1e-12);
        let m = measure_constants(&prob).unwrap();
        assert!((m.sigma_max - 20.0).abs() < 1e-12);
    }

    #[test]
    fn random_instance_spectra_are_exact() {
        let p = pp(10.0, 12.0, 30.0, 1.0, 2.0, 0.0, 0.0);
        let prob = gen_random_quadratic(5, 4, None, &p, 1.0, 3).unwrap();
        let m = measure_constants(&prob).unwrap();
        assert!((m.f_eig_min - 1.0).abs() < 1e-10 && (m.f_eig_max - 10.0).abs() < 1e-10);
        assert!((m.g_eig_min - 2.0).abs() < 1e-10 && (m.g_eig_max - 12.0).abs() < 1e-10);
        assert!((m.sigma_max - 30.0).abs() < 1e-10);
    }

    #[test]
    fn random_instance_is_deterministic() {
        let p = pp(10.0, 10.0, 20.0, 1.0, 1.0, 0.0, 0.0);
        let a = gen_random_quadratic(4, 3, None, &p, 1.0, 11).unwrap();
        let b = gen_random_quadratic(4, 3, None, &p, 1.0, 11).unwrap();
        let x = [0.1, -0.2, 0.3, 0.4];
        let ga = a.f().gradient(&x);
        let gb = b.f().gradient(&x);
        assert!(ga.iter().zip(&gb).all(|(u, v)| u.to_bits() == v.to_bits()));
        assert_eq!(a.b().dense(), b.b().dense());
    }

    #[test]
    fn restricted_side_needs_zero_mu() {
        let p = pp(10.0, 10.0, 20.0, 1.0, 1.0, 1.0, 1.0);
        assert!(gen_random_quadratic(6, 4, None, &p, 1.0, 1).is_err());
    }

    #[test]
    fn presets_generate() {
        for name in PRESETS {
            let prob = preset(name, 42).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(prob.condition_numbers().is_ok(), "{name}");
            assert!(validate_param_inequalities(prob.params()).ok(), "{name}");
        }
        assert!(preset("nope", 1).is_err());
    }
}
