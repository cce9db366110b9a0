//! Shared fixtures and independent reference computations for the
//! integration tests. Reference linear algebra goes through nalgebra.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sliding_saddle::numerics::{DiagWeight, Mat};
use sliding_saddle::oracles::{LinearOp, Quadratic};
use sliding_saddle::saddle::ProblemParams;
use sliding_saddle::vi::{ConstraintSet, VIComponent, VIProblem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn to_na(m: &Mat) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// `P^{-1/2} A P^{-1/2}`
fn p_scaled(a: &Mat, w: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] / (w[i] * w[j]).sqrt())
}

/// Smoothness of `½ zᵀHz` in the P-geometry.
pub fn p_smoothness(h: &Mat, w: &[f64]) -> f64 {
    p_scaled(h, w).symmetric_eigen().eigenvalues.max()
}

/// Lipschitz constant of `z ↦ Az` from `‖·‖_P` to `‖·‖_{P⁻¹}`.
pub fn p_opnorm(a: &Mat, w: &[f64]) -> f64 {
    p_scaled(a, w).singular_values().max()
}

pub fn singular_values_na(m: &Mat) -> Vec<f64> {
    let mut s: Vec<f64> = to_na(m).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Minimum-norm least-squares solution.
pub fn lstsq_na(a: &Mat, b: &[f64]) -> Vec<f64> {
    let svd = to_na(a).svd(true, true);
    svd.solve(&DVector::from_column_slice(b), 1e-12 * svd.singular_values.max()).unwrap().iter().copied().collect()
}

pub fn params(l_x: f64, l_y: f64, l_xy: f64, mu_x: f64, mu_y: f64, mu_xy: f64, mu_yx: f64) -> ProblemParams {
    ProblemParams::new(l_x, l_y, l_xy, mu_x, mu_y, mu_xy, mu_yx).unwrap()
}

/// Random PSD `GᵀG` scaled to a largest eigenvalue in `[0.5, 5]`.
fn random_psd(rng: &mut impl Rng, d: usize) -> Mat {
    let k = rng.random_range(1..=d);
    let g = Mat::from_row_major(k, d, gaussian(rng, k * d)).unwrap();
    let mut h = g.gram();
    let top = to_na(&h).symmetric_eigen().eigenvalues.max();
    h.scale(rng.random_range(0.5..5.0) / top.max(1e-12));
    h.symmetrize();
    h
}

/// Random monotone linear operator: skew part plus a small PSD part.
fn random_monotone(rng: &mut impl Rng, d: usize) -> Mat {
    let mut a = Mat::zeros(d, d);
    for i in 0..d {
        for j in i + 1..d {
            let v: f64 = rng.sample(StandardNormal);
            a[(i, j)] = v;
            a[(j, i)] = -v;
        }
    }
    if rng.random_bool(0.5) {
        let mut s = random_psd(rng, d);
        s.scale(0.3);
        for i in 0..d {
            for j in 0..d {
                a[(i, j)] += s[(i, j)];
            }
        }
    }
    a
}

pub struct RandomVi {
    pub vi: VIProblem<'static>,
    pub l: Vec<f64>,
    pub m: Vec<f64>,
}

/// Finite-sum VI with `n` components on `R^d`, exact P-geometry constants.
pub fn random_vi(rng: &mut impl Rng, n: usize, d: usize, ball: bool) -> RandomVi {
    let w: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..2.0)).collect();
    let mut comps = Vec::new();
    let (mut ls, mut ms) = (Vec::new(), Vec::new());
    for _ in 0..n {
        let kind = rng.random_range(0..3);
        let mut l = 0.0;
        let mut m = 0.0;
        let p = if kind != 1 {
            let h = random_psd(rng, d);
            l = p_smoothness(&h, &w);
            let q = gaussian(rng, d);
            Some(Box::new(Quadratic::with_constants(h, q, l, 0.0).unwrap())
                as Box<dyn sliding_saddle::oracles::SmoothFn>)
        } else {
            None
        };
        let q = if kind != 0 {
            let a = random_monotone(rng, d);
            m = p_opnorm(&a, &w);
            Some(Box::new(LinearOp(a)) as Box<dyn sliding_saddle::oracles::MonotoneOp>)
        } else {
            None
        };
        comps.push(VIComponent::new(p, q, l, m));
        ls.push(l);
        ms.push(m);
    }
    let weight = DiagWeight::new(w).unwrap();
    let set = if ball {
        ConstraintSet::ball(gaussian(rng, d), rng.random_range(0.5..3.0)).unwrap()
    } else {
        ConstraintSet::FullSpace
    };
    RandomVi { vi: VIProblem::new(comps, weight, set).unwrap(), l: ls, m: ms }
}

/// Random feasible point: inside the ball, or a Gaussian of scale 3.
pub fn feasible_point(rng: &mut impl Rng, vi: &VIProblem<'_>) -> Vec<f64> {
    let d = vi.dim();
    match vi.set() {
        ConstraintSet::FullSpace => gaussian(rng, d).iter().map(|v| 3.0 * v).collect(),
        ConstraintSet::Ball { center, radius } => {
            let dir = gaussian(rng, d);
            let n = vi.weight().norm(&dir);
            let r = radius * rng.random_range(0.0f64..1.0).powf(1.0 / d as f64);
            center.iter().zip(&dir).map(|(c, v)| c + r * v / n).collect()
        }
    }
}
