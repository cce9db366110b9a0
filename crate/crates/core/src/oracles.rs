//! First-order oracles, call counting and the execution-time cost model.

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::numerics::{self, dot, sub, Mat};

/// A convex differentiable function with declared constants.
pub trait SmoothFn {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Lipschitz constant of the gradient.
    fn smoothness(&self) -> f64;
    fn strong_convexity(&self) -> f64;
    /// `h(x) - h(x0) - <∇h(x0), x - x0>`. Implementors with closed forms
    /// should override this to avoid cancellation near `x0`.
    fn divergence(&self, x: &[f64], x0: &[f64]) -> f64 {
        self.value(x) - self.value(x0) - dot(&self.gradient(x0), &sub(x, x0))
    }
    /// `(H, q)` when the function is known to be `½xᵀHx + qᵀx`.
    fn quadratic_form(&self) -> Option<(&Mat, &[f64])> {
        None
    }
}

/// A monotone operator.
pub trait MonotoneOp {
    fn dim(&self) -> usize;
    fn apply(&self, z: &[f64]) -> Vec<f64>;
}

/// A linear map `B: R^cols -> R^rows`.
pub trait LinearMap {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn forward(&self, v: &[f64]) -> Vec<f64>;
    fn adjoint(&self, w: &[f64]) -> Vec<f64>;
    fn dense(&self) -> Option<Mat> {
        None
    }
}

impl LinearMap for Mat {
    fn rows(&self) -> usize {
        Mat::rows(self)
    }
    fn cols(&self) -> usize {
        Mat::cols(self)
    }
    fn forward(&self, v: &[f64]) -> Vec<f64> {
        self.mul_vec(v)
    }
    fn adjoint(&self, w: &[f64]) -> Vec<f64> {
        self.tr_mul_vec(w)
    }
    fn dense(&self) -> Option<Mat> {
        Some(self.clone())
    }
}

/// Materializes any linear map column by column. Uncounted unless `b` is.
pub fn materialize(b: &dyn LinearMap) -> Mat {
    if let Some(m) = b.dense() {
        return m;
    }
    let cols: Vec<Vec<f64>> = (0..b.cols()).map(|j| b.forward(&numerics::unit(b.cols(), j))).collect();
    Mat::from_columns(b.rows(), &cols)
}

// ---------------------------------------------------------------------------
// quadratics

/// `h(x) = ½ xᵀHx + qᵀx` with `H` symmetric positive semidefinite.
#[derive(Clone, Debug)]
pub struct Quadratic {
    h: Mat,
    q: Vec<f64>,
    l: f64,
    mu: f64,
}

impl Quadratic {
    /// Constants are read off the spectrum of `H`.
    pub fn new(h: Mat, q: Vec<f64>) -> Result<Self> {
        if q.len() != h.rows() {
            return Err(Error::dims(h.rows(), q.len()));
        }
        let eigs = numerics::sym_eigs(&h)?;
        let scale = h.max_abs().max(1.0);
        let l = eigs.first().copied().unwrap_or(0.0).max(0.0);
        let low = eigs.last().copied().unwrap_or(0.0);
        if low < -1e-10 * scale {
            return Err(Error::InvalidInstance(format!(
                "quadratic is not convex: smallest Hessian eigenvalue {low:e}"
            )));
        }
        let mut h = h;
        h.symmetrize();
        Ok(Quadratic { h, q, l, mu: low.max(0.0) })
    }

    /// Same function but with declared constants instead of measured ones.
    /// Used when the exact spectrum is known by construction.
    pub fn with_constants(h: Mat, q: Vec<f64>, l: f64, mu: f64) -> Result<Self> {
        if q.len() != h.rows() || !h.is_square() {
            return Err(Error::dims(h.rows(), q.len()));
        }
        Ok(Quadratic { h, q, l, mu })
    }

    /// `c/2 ‖x‖² + qᵀx`
    pub fn isotropic(c: f64, q: Vec<f64>) -> Self {
        let n = q.len();
        let mut h = Mat::identity(n);
        h.scale(c);
        Quadratic { h, q, l: c.max(0.0), mu: c.max(0.0) }
    }

    pub fn hessian(&self) -> &Mat {
        &self.h
    }

    pub fn linear(&self) -> &[f64] {
        &self.q
    }
}

impl SmoothFn for Quadratic {
    fn dim(&self) -> usize {
        self.q.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.h.mul_vec(x)) + dot(&self.q, x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.h.mul_vec(x);
        numerics::axpy(1.0, &self.q, &mut g);
        g
    }
    fn smoothness(&self) -> f64 {
        self.l
    }
    fn strong_convexity(&self) -> f64 {
        self.mu
    }
    fn divergence(&self, x: &[f64], x0: &[f64]) -> f64 {
        let d = sub(x, x0);
        0.5 * dot(&d, &self.h.mul_vec(&d))
    }
    fn quadratic_form(&self) -> Option<(&Mat, &[f64])> {
        Some((&self.h, &self.q))
    }
}

/// `z ↦ Az` for a (typically skew-symmetric) matrix `A`.
#[derive(Clone, Debug)]
pub struct LinearOp(pub Mat);

impl MonotoneOp for LinearOp {
    fn dim(&self) -> usize {
        self.0.cols()
    }
    fn apply(&self, z: &[f64]) -> Vec<f64> {
        self.0.mul_vec(z)
    }
}

/// Bregman divergence `h(x) - h(x0) - <∇h(x0), x - x0>`.
pub fn bregman(h: &dyn SmoothFn, x: &[f64], x0: &[f64]) -> Result<f64> {
    if x.len() != x0.len() {
        return Err(Error::dims(x0.len(), x.len()));
    }
    if x.len() != h.dim() {
        return Err(Error::dims(h.dim(), x.len()));
    }
    if x == x0 {
        return Ok(0.0);
    }
    Ok(h.divergence(x, x0))
}

// ---------------------------------------------------------------------------
// accounting

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Counter {
    GradF,
    GradG,
    MatvecB,
    MatvecBt,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LedgerCounts {
    pub grad_f: u64,
    pub grad_g: u64,
    pub matvec_b: u64,
    pub matvec_bt: u64,
}

impl LedgerCounts {
    pub fn matvecs(&self) -> u64 {
        self.matvec_b + self.matvec_bt
    }
}

/// Oracle call counters for one run. Counts only move up, and only through
/// [`Counted`] wrappers.
#[derive(Debug, Default)]
pub struct OracleLedger {
    grad_f: Cell<u64>,
    grad_g: Cell<u64>,
    matvec_b: Cell<u64>,
    matvec_bt: Cell<u64>,
}

impl OracleLedger {
    pub fn new() -> Self {
        Self::default()
    }

    fn bump(&self, c: Counter) {
        let cell = match c {
            Counter::GradF => &self.grad_f,
            Counter::GradG => &self.grad_g,
            Counter::MatvecB => &self.matvec_b,
            Counter::MatvecBt => &self.matvec_bt,
        };
        cell.set(cell.get() + 1);
    }

    pub fn counts(&self) -> LedgerCounts {
        LedgerCounts {
            grad_f: self.grad_f.get(),
            grad_g: self.grad_g.get(),
            matvec_b: self.matvec_b.get(),
            matvec_bt: self.matvec_bt.get(),
        }
    }
}

/// Counting wrapper. Gradients and operator applications bump `kind`;
/// linear maps bump `MatvecB` on forward and `MatvecBt` on adjoint.
/// Function values are never counted.
pub struct Counted<'a, T: ?Sized> {
    inner: &'a T,
    ledger: &'a OracleLedger,
    kind: Counter,
}

impl<'a, T: ?Sized> Counted<'a, T> {
    pub fn new(inner: &'a T, ledger: &'a OracleLedger, kind: Counter) -> Self {
        Counted { inner, ledger, kind }
    }

    pub fn inner(&self) -> &'a T {
        self.inner
    }
}

/// Wraps a linear map; the counter kind is implied.
pub fn counted_map<'a, T: LinearMap + ?Sized>(b: &'a T, ledger: &'a OracleLedger) -> Counted<'a, T> {
    Counted::new(b, ledger, Counter::MatvecB)
}

impl<T: SmoothFn + ?Sized> SmoothFn for Counted<'_, T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.ledger.bump(self.kind);
        self.inner.gradient(x)
    }
    fn smoothness(&self) -> f64 {
        self.inner.smoothness()
    }
    fn strong_convexity(&self) -> f64 {
        self.inner.strong_convexity()
    }
    fn divergence(&self, x: &[f64], x0: &[f64]) -> f64 {
        self.inner.divergence(x, x0)
    }
    fn quadratic_form(&self) -> Option<(&Mat, &[f64])> {
        self.inner.quadratic_form()
    }
}

impl<T: MonotoneOp + ?Sized> MonotoneOp for Counted<'_, T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply(&self, z: &[f64]) -> Vec<f64> {
        self.ledger.bump(self.kind);
        self.inner.apply(z)
    }
}

impl<T: LinearMap + ?Sized> LinearMap for Counted<'_, T> {
    fn rows(&self) -> usize {
        self.inner.rows()
    }
    fn cols(&self) -> usize {
        self.inner.cols()
    }
    fn forward(&self, v: &[f64]) -> Vec<f64> {
        self.ledger.bump(Counter::MatvecB);
        self.inner.forward(v)
    }
    fn adjoint(&self, w: &[f64]) -> Vec<f64> {
        self.ledger.bump(Counter::MatvecBt);
        self.inner.adjoint(w)
    }
    fn dense(&self) -> Option<Mat> {
        None
    }
}

/// Abstract per-call times.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostModel {
    pub tau_f: f64,
    pub tau_g: f64,
    pub tau_b: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel { tau_f: 1.0, tau_g: 1.0, tau_b: 1.0 }
    }
}

impl CostModel {
    pub fn new(tau_f: f64, tau_g: f64, tau_b: f64) -> Result<Self> {
        for (name, v) in [("tau_f", tau_f), ("tau_g", tau_g), ("tau_B", tau_b)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config { field: name.into(), msg: format!("must be finite and >= 0, got {v}") });
            }
        }
        Ok(CostModel { tau_f, tau_g, tau_b })
    }
}

pub fn execution_time(counts: &LedgerCounts, model: &CostModel) -> f64 {
    model.tau_f * counts.grad_f as f64 + model.tau_g * counts.grad_g as f64 + model.tau_b * counts.matvecs() as f64
}

// ---------------------------------------------------------------------------

/// Remembers the last `(point, value)` pair of an operator so a repeated
/// evaluation at the bitwise-identical point is free.
#[derive(Debug, Default)]
pub struct OpMemo {
    key: Vec<u64>,
    value: Option<Vec<f64>>,
}

impl OpMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_eval(&mut self, z: &[f64], eval: impl FnOnce(&[f64]) -> Vec<f64>) -> Vec<f64> {
        let same =
            self.value.is_some() && self.key.len() == z.len() && self.key.iter().zip(z).all(|(k, v)| *k == v.to_bits());
        if !same {
            self.key = z.iter().map(|v| v.to_bits()).collect();
            self.value = Some(eval(z));
        }
        self.value.clone().expect("memo filled above")
    }

    pub fn clear(&mut self) {
        self.value = None;
        self.key.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_sq(n: usize) -> Quadratic {
        Quadratic::isotropic(1.0, vec![0.0; n])
    }

    #[test]
    fn counting_examples() {
        let ledger = OracleLedger::new();
        assert_eq!(ledger.counts(), LedgerCounts::default());
        let f = half_sq(2);
        let cf = Counted::new(&f, &ledger, Counter::GradF);
        for _ in 0..3 {
            cf.gradient(&[1.0, 2.0]);
        }
        cf.value(&[1.0, 2.0]);
        assert_eq!(ledger.counts().grad_f, 3);

        let b = Mat::identity(2);
        let cb = counted_map(&b, &ledger);
        cb.forward(&[1.0, 0.0]);
        cb.adjoint(&[0.0, 1.0]);
        let c = ledger.counts();
        assert_eq!((c.matvec_b, c.matvec_bt, c.grad_g), (1, 1, 0));
    }

    #[test]
    fn counting_is_transparent() {
        let h = Mat::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let f = Quadratic::new(h, vec![0.1, -0.7]).unwrap();
        let ledger = OracleLedger::new();
        let cf = Counted::new(&f, &ledger, Counter::GradG);
        let x = [0.123456789, -9.87654321];
        let a = f.gradient(&x);
        let b = cf.gradient(&x);
        assert!(a.iter().zip(&b).all(|(u, v)| u.to_bits() == v.to_bits()));
    }

    #[test]
    fn execution_time_examples() {
        let unit = CostModel::default();
        let ones = LedgerCounts { grad_f: 1, grad_g: 1, matvec_b: 1, matvec_bt: 1 };
        assert_eq!(execution_time(&ones, &unit), 4.0);
        let c = LedgerCounts { grad_f: 2, grad_g: 0, matvec_b: 3, matvec_bt: 1 };
        assert_eq!(execution_time(&c, &CostModel::new(2.0, 5.0, 1.0).unwrap()), 8.0);
        assert_eq!(execution_time(&LedgerCounts::default(), &CostModel::new(3.0, 7.0, 11.0).unwrap()), 0.0);
        assert!(CostModel::new(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn bregman_examples() {
        let h = half_sq(2);
        assert_eq!(bregman(&h, &[1.0, 0.0], &[0.0, 0.0]).unwrap(), 0.5);
        assert_eq!(bregman(&h, &[0.3, 0.4], &[0.3, 0.4]).unwrap(), 0.0);
        let h3 = Quadratic::isotropic(3.0, vec![0.0]);
        assert!((bregman(&h3, &[2.0], &[1.0]).unwrap() - 1.5).abs() < 1e-15);
        assert!(bregman(&h, &[1.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn quadratic_constants_from_spectrum() {
        let h = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let f = Quadratic::new(h, vec![0.0; 2]).unwrap();
        assert!((f.smoothness() - 3.0).abs() < 1e-14);
        assert!((f.strong_convexity() - 1.0).abs() < 1e-14);
        let bad = Mat::from_diag(&[1.0, -1.0]);
        assert!(Quadratic::new(bad, vec![0.0; 2]).is_err());
    }

    #[test]
    fn memo_reuses_identical_point() {
        let calls = Cell::new(0);
        let mut memo = OpMemo::new();
        let eval = |z: &[f64]| {
            calls.set(calls.get() + 1);
            z.to_vec()
        };
        memo.get_or_eval(&[1.0, 2.0], eval);
        memo.get_or_eval(&[1.0, 2.0], eval);
        assert_eq!(calls.get(), 1);
        memo.get_or_eval(&[1.0, 2.5], eval);
        assert_eq!(calls.get(), 2);
    }
}
