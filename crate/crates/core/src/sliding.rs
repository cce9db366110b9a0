//! Recursive sliding method for finite-sum monotone VIs.
//!
//! Level `k` runs `T_k` iterations. In each of them every component that
//! is not yet frozen gets re-parameterized as `α⁻¹ p(α z + (1 - α) z̄_k)`,
//! component `k` is frozen into a P-quadratic around the level iterate, and
//! level `k + 1` is solved recursively. The deepest level is a closed-form
//! minimization of the sum of frozen quadratics followed by a projection.

use crate::error::{Error, Result};
use crate::numerics::{all_finite, axpy, DiagWeight};
use crate::oracles::OpMemo;
use crate::vi::{project, VIProblem, MAX_COMPONENTS};

/// `α₀ = 1`, `α_{t+1} = 2 / (1 + √(1 + 4/α_t²))`.
#[derive(Clone, Debug)]
pub struct AlphaSequence {
    vals: Vec<f64>,
}

impl Default for AlphaSequence {
    fn default() -> Self {
        AlphaSequence { vals: vec![1.0] }
    }
}

impl AlphaSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, t: usize) -> f64 {
        while self.vals.len() <= t {
            let a = *self.vals.last().unwrap();
            self.vals.push(next_alpha(a));
        }
        self.vals[t]
    }

    /// `α_0 ..= α_t`.
    pub fn prefix(&mut self, t: usize) -> &[f64] {
        self.get(t);
        &self.vals[..=t]
    }
}

fn next_alpha(a: f64) -> f64 {
    2.0 / (1.0 + (1.0 + 4.0 / (a * a)).sqrt())
}

pub fn alpha(t: usize) -> f64 {
    (0..t).fold(1.0, |a, _| next_alpha(a))
}

/// Inner iteration counts per level. `order[k]` is the component handled at
/// level `k`; `t[k]` is `T_{k+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub order: Vec<usize>,
    pub t: Vec<usize>,
    pub eps: f64,
}

impl Schedule {
    pub fn new(order: Vec<usize>, t: Vec<usize>, eps: f64) -> Result<Self> {
        let n = order.len();
        if n != t.len() {
            return Err(Error::InvalidSchedule(format!("{} levels but {} counts", n, t.len())));
        }
        let mut seen = vec![false; n];
        for &c in &order {
            if c >= n || seen[c] {
                return Err(Error::InvalidSchedule(format!("order {order:?} is not a permutation")));
            }
            seen[c] = true;
        }
        if t.contains(&0) {
            return Err(Error::InvalidSchedule("iteration counts must be positive".into()));
        }
        Ok(Schedule { order, t, eps })
    }

    /// Components in their given order with explicit counts.
    pub fn in_order(t: Vec<usize>) -> Result<Self> {
        Schedule::new((0..t.len()).collect(), t, f64::NAN)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::InvalidSchedule(format!("schedule has {} levels, problem has {n}", self.len())));
        }
        Ok(())
    }

    /// `∏_{j ≤ k} T_j` for every level `k`.
    pub fn prefix_products(&self) -> Vec<u64> {
        self.t
            .iter()
            .scan(1u64, |acc, &x| {
                *acc = acc.saturating_mul(x as u64);
                Some(*acc)
            })
            .collect()
    }
}

/// `max{√(L/ε), M/ε, 1}`.
pub fn schedule_weight(l: f64, m: f64, eps: f64) -> f64 {
    (l / eps).sqrt().max(m / eps).max(1.0)
}

/// Sorts components ascending by [`schedule_weight`] and sets
/// `T₁ = ⌈2v₁⌉`, `T_{j+1} = ⌈2v_{j+1}/v_j⌉`.
pub fn make_schedule(l: &[f64], m: &[f64], eps: f64) -> Result<Schedule> {
    let n = l.len();
    if m.len() != n {
        return Err(Error::dims(n, m.len()));
    }
    if n == 0 || n > MAX_COMPONENTS {
        return Err(Error::InvalidSchedule(format!("need 1..={MAX_COMPONENTS} components, got {n}")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidSchedule(format!("eps must be positive, got {eps}")));
    }
    for i in 0..n {
        if !(l[i] >= 0.0 && m[i] >= 0.0 && l[i] + m[i] > 0.0 && (l[i] + m[i]).is_finite()) {
            return Err(Error::InvalidSchedule(format!(
                "component {i}: need L, M >= 0 with L + M > 0, got L = {}, M = {}",
                l[i], m[i]
            )));
        }
    }
    let v: Vec<f64> = (0..n).map(|i| schedule_weight(l[i], m[i], eps)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut t = Vec::with_capacity(n);
    let mut prev = 1.0;
    for &c in &order {
        let tk = (2.0 * v[c] / prev).ceil();
        if !(tk.is_finite() && tk < 1e15) {
            return Err(Error::InvalidSchedule(format!("iteration count {tk} is too large")));
        }
        t.push(tk as usize);
        prev = v[c];
    }
    Schedule::new(order, t, eps)
}

/// Frozen model `(H/2)‖z - center‖²_P + <z, linear>`.
#[derive(Clone, Debug)]
pub struct FrozenQuadratic {
    pub h: f64,
    pub center: Vec<f64>,
    pub linear: Vec<f64>,
}

/// Unconstrained minimizer of a sum of frozen quadratics, projected onto
/// the set. The sum is itself a single isotropic P-quadratic, so the
/// projection of its minimizer is the constrained minimizer.
pub fn inner_argmin(frozen: &[FrozenQuadratic], p: &DiagWeight, set: &crate::vi::ConstraintSet) -> Result<Vec<f64>> {
    let d = p.dim();
    let hs: f64 = frozen.iter().map(|q| q.h).sum();
    if !(hs > 0.0 && hs.is_finite()) {
        return Err(Error::InvalidSchedule(format!("sum of curvatures must be positive, got {hs}")));
    }
    let mut acc = vec![0.0; d];
    let mut lin = vec![0.0; d];
    for q in frozen {
        axpy(q.h, &q.center, &mut acc);
        axpy(1.0, &q.linear, &mut lin);
    }
    let z: Vec<f64> = acc.iter().zip(&lin).zip(p.diagonal()).map(|((a, l), w)| (a - l / w) / hs).collect();
    Ok(project(set, p, &z))
}

/// `p̂(z) = s · p(a z + b)`.
#[derive(Clone, Debug)]
pub struct AffineReparam {
    pub s: f64,
    pub a: f64,
    pub b: Vec<f64>,
}

impl AffineReparam {
    pub fn identity(d: usize) -> Self {
        AffineReparam { s: 1.0, a: 1.0, b: vec![0.0; d] }
    }

    /// `α⁻¹ p̂(α z + (1 - α) zbar)`.
    pub fn compose(&self, alpha: f64, zbar: &[f64]) -> Self {
        let mut b = self.b.clone();
        axpy(self.a * (1.0 - alpha), zbar, &mut b);
        AffineReparam { s: self.s / alpha, a: self.a * alpha, b }
    }

    pub fn inner_point(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.b).map(|(zi, bi)| self.a * zi + bi).collect()
    }
}

/// One level iteration as reported to a trace callback.
#[derive(Debug)]
pub struct LevelEvent<'e> {
    pub level: usize,
    pub t: usize,
    pub z: &'e [f64],
    pub zbar: &'e [f64],
}

#[derive(Clone, Debug)]
pub struct SlidingOutput {
    pub z_out: Vec<f64>,
    /// `∇pᵢ` evaluations, indexed by original component.
    pub grad_calls: Vec<u64>,
    /// `Qᵢ` evaluations, indexed by original component.
    pub op_calls: Vec<u64>,
    /// Largest relative deviation of the reparam coefficient `a` from the
    /// product of α's that defines the level constants, and of `s·a` from 1.
    pub reparam_drift: f64,
}

struct Engine<'r, 'v, 'a, 't> {
    vi: &'r VIProblem<'a>,
    order: &'v [usize],
    t: &'v [usize],
    alphas: Vec<f64>,
    /// `α_{T_k - 1}` per level.
    alpha_last: Vec<f64>,
    z: Vec<Vec<f64>>,
    frozen: Vec<Option<FrozenQuadratic>>,
    /// `reparams[k][j]`: re-parameterization of the level-`j` component as
    /// seen from inside level `k` (only `j ≥ k` is meaningful).
    reparams: Vec<Vec<AffineReparam>>,
    memos: Vec<OpMemo>,
    grad_calls: Vec<u64>,
    op_calls: Vec<u64>,
    drift: f64,
    trace: Option<&'t mut dyn FnMut(&LevelEvent<'_>)>,
}

impl Engine<'_, '_, '_, '_> {
    fn level(&mut self, k: usize, l_prod: f64, m_ratio: f64) -> Result<Vec<f64>> {
        let n = self.order.len();
        if k == n {
            let frozen: Vec<FrozenQuadratic> =
                self.frozen.iter().map(|f| f.clone().expect("all levels frozen")).collect();
            return inner_argmin(&frozen, self.vi.weight(), self.vi.set());
        }
        let d = self.vi.dim();
        let c = self.order[k];
        let vi = self.vi;
        let comp = &vi.components()[c];
        let mut zbar = self.z[k].clone();

        for t in 0..self.t[k] {
            let alpha = self.alphas[t];
            for j in k..n {
                let parent = if k == 0 { AffineReparam::identity(d) } else { self.reparams[k - 1][j].clone() };
                self.reparams[k][j] = parent.compose(alpha, &zbar);
            }
            let lp = l_prod * alpha;
            let mr = m_ratio * alpha / self.alpha_last[k];
            let h = comp.l * lp + comp.m * mr;

            let rp = &self.reparams[k][k];
            self.drift = self.drift.max(((rp.a - lp) / lp).abs()).max((rp.s * rp.a - 1.0).abs());

            let zk = self.z[k].clone();
            let mut delta = vec![0.0; d];
            if let Some(p) = &comp.p {
                let g = p.gradient(&rp.inner_point(&zk));
                self.grad_calls[c] += 1;
                axpy(rp.s * rp.a, &g, &mut delta);
            }
            let q_at_z = match &comp.q {
                Some(q) => {
                    let calls = &mut self.op_calls[c];
                    let v = self.memos[k].get_or_eval(&zk, |z| {
                        *calls += 1;
                        q.apply(z)
                    });
                    axpy(1.0, &v, &mut delta);
                    Some(v)
                }
                None => None,
            };
            self.frozen[k] = Some(FrozenQuadratic { h, center: zk, linear: delta });

            let z_half = self.level(k + 1, lp, mr)?;

            for (zb, zh) in zbar.iter_mut().zip(&z_half) {
                *zb = alpha * zh + (1.0 - alpha) * *zb;
            }
            let mut z_next = z_half.clone();
            if let (Some(q), Some(qz)) = (&comp.q, q_at_z) {
                let qh = q.apply(&z_half);
                self.op_calls[c] += 1;
                let w = self.vi.weight().diagonal();
                for i in 0..d {
                    z_next[i] += (qz[i] - qh[i]) / (h * w[i]);
                }
            }
            if !all_finite(&z_next) || !all_finite(&zbar) {
                return Err(Error::NonFinite(format!("sliding iterate at level {k}, t = {t}")));
            }
            self.z[k] = z_next;
            if let Some(cb) = self.trace.as_mut() {
                cb(&LevelEvent { level: k, t, z: &self.z[k], zbar: &zbar });
            }
        }
        self.frozen[k] = None;
        Ok(zbar)
    }
}

/// Runs one pass of the method from `z_in` and returns `z̄` of the top level.
pub fn run_sliding(
    vi: &VIProblem<'_>,
    schedule: &Schedule,
    z_in: &[f64],
    trace: Option<&mut dyn FnMut(&LevelEvent<'_>)>,
) -> Result<SlidingOutput> {
    let n = vi.len();
    schedule.check_len(n)?;
    if z_in.len() != vi.dim() {
        return Err(Error::dims(vi.dim(), z_in.len()));
    }
    if !all_finite(z_in) {
        return Err(Error::NonFinite("z_in".into()));
    }
    vi.set().check(vi.weight(), z_in)?;

    let t_max = *schedule.t.iter().max().expect("non-empty schedule");
    let mut seq = AlphaSequence::new();
    let alphas = seq.prefix(t_max).to_vec();
    let alpha_last = schedule.t.iter().map(|&t| alphas[t - 1]).collect();
    let d = vi.dim();
    let mut engine = Engine {
        vi,
        order: &schedule.order,
        t: &schedule.t,
        alphas,
        alpha_last,
        z: vec![z_in.to_vec(); n],
        frozen: vec![None; n],
        reparams: vec![vec![AffineReparam::identity(d); n]; n],
        memos: (0..n).map(|_| OpMemo::new()).collect(),
        grad_calls: vec![0; n],
        op_calls: vec![0; n],
        drift: 0.0,
        trace,
    };
    let z_out = engine.level(0, 1.0, 1.0)?;
    Ok(SlidingOutput { z_out, grad_calls: engine.grad_calls, op_calls: engine.op_calls, reparam_drift: engine.drift })
}
