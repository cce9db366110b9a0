//! Finite-sum monotone variational inequalities: find `z ∈ C` with
//! `p(z) - p(z') + <Q(z'), z - z'> ≤ 0` for all `z' ∈ C`,
//! where `p = Σ pᵢ` and `Q = Σ Qᵢ`.

use crate::error::{Error, Result};
use crate::numerics::{dot, sub, DiagWeight};
use crate::oracles::{MonotoneOp, SmoothFn};
use crate::sliding::Schedule;

pub const MAX_COMPONENTS: usize = 8;
pub const BALL_TOL: f64 = 1e-9;

pub struct VIComponent<'a> {
    pub p: Option<Box<dyn SmoothFn + 'a>>,
    pub q: Option<Box<dyn MonotoneOp + 'a>>,
    /// Lipschitz constant of `∇pᵢ` in the P-geometry.
    pub l: f64,
    /// Lipschitz constant of `Qᵢ` in the P-geometry.
    pub m: f64,
}

impl<'a> VIComponent<'a> {
    pub fn new(p: Option<Box<dyn SmoothFn + 'a>>, q: Option<Box<dyn MonotoneOp + 'a>>, l: f64, m: f64) -> Self {
        VIComponent { p, q, l, m }
    }

    pub fn smooth(p: impl SmoothFn + 'a, l: f64) -> Self {
        VIComponent { p: Some(Box::new(p)), q: None, l, m: 0.0 }
    }

    pub fn operator(q: impl MonotoneOp + 'a, m: f64) -> Self {
        VIComponent { p: None, q: Some(Box::new(q)), l: 0.0, m }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConstraintSet {
    FullSpace,
    /// `{z : ‖z - center‖_P ≤ radius}`
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
}

impl ConstraintSet {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidInstance(format!("ball radius must be positive, got {radius}")));
        }
        Ok(ConstraintSet::Ball { center, radius })
    }

    /// Feasibility with relative slack `BALL_TOL`. Returns the offending
    /// distance on failure.
    pub fn check(&self, p: &DiagWeight, z: &[f64]) -> Result<()> {
        match self {
            ConstraintSet::FullSpace => Ok(()),
            ConstraintSet::Ball { center, radius } => {
                let d = p.norm(&sub(z, center));
                if d <= radius * (1.0 + BALL_TOL) {
                    Ok(())
                } else {
                    Err(Error::Infeasible { distance: d, radius: *radius })
                }
            }
        }
    }
}

/// Projection onto the set in the P-norm.
pub fn project(set: &ConstraintSet, p: &DiagWeight, z: &[f64]) -> Vec<f64> {
    match set {
        ConstraintSet::FullSpace => z.to_vec(),
        ConstraintSet::Ball { center, radius } => {
            let off = sub(z, center);
            let d = p.norm(&off);
            if d <= *radius {
                return z.to_vec();
            }
            let s = radius / d;
            center.iter().zip(&off).map(|(c, o)| c + s * o).collect()
        }
    }
}

pub struct VIProblem<'a> {
    components: Vec<VIComponent<'a>>,
    weight: DiagWeight,
    set: ConstraintSet,
}

impl<'a> VIProblem<'a> {
    pub fn new(components: Vec<VIComponent<'a>>, weight: DiagWeight, set: ConstraintSet) -> Result<Self> {
        let n = components.len();
        if n == 0 || n > MAX_COMPONENTS {
            return Err(Error::InvalidInstance(format!("need 1..={MAX_COMPONENTS} components, got {n}")));
        }
        let d = weight.dim();
        for (i, c) in components.iter().enumerate() {
            if let Some(p) = &c.p {
                if p.dim() != d {
                    return Err(Error::dims(d, p.dim()));
                }
            }
            if let Some(q) = &c.q {
                if q.dim() != d {
                    return Err(Error::dims(d, q.dim()));
                }
            }
            if !(c.l >= 0.0 && c.m >= 0.0 && c.l.is_finite() && c.m.is_finite() && c.l + c.m > 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "component {i}: need finite L, M >= 0 with L + M > 0, got L = {}, M = {}",
                    c.l, c.m
                )));
            }
        }
        if let ConstraintSet::Ball { center, radius } = &set {
            if center.len() != d {
                return Err(Error::dims(d, center.len()));
            }
            if !(*radius > 0.0) {
                return Err(Error::InvalidInstance("ball radius must be positive".into()));
            }
        }
        Ok(VIProblem { components, weight, set })
    }

    pub fn dim(&self) -> usize {
        self.weight.dim()
    }
    pub fn len(&self) -> usize {
        self.components.len()
    }
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
    pub fn components(&self) -> &[VIComponent<'a>] {
        &self.components
    }
    pub fn weight(&self) -> &DiagWeight {
        &self.weight
    }
    pub fn set(&self) -> &ConstraintSet {
        &self.set
    }
    pub fn lipschitz(&self) -> (Vec<f64>, Vec<f64>) {
        (self.components.iter().map(|c| c.l).collect(), self.components.iter().map(|c| c.m).collect())
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        self.components.iter().filter_map(|c| c.p.as_ref()).map(|p| p.value(z)).sum()
    }

    pub fn operator(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for q in self.components.iter().filter_map(|c| c.q.as_ref()) {
            crate::numerics::axpy(1.0, &q.apply(z), &mut out);
        }
        out
    }
}

/// `p(z_out) - p(z) + <Q(z), z_out - z>`.
pub fn gap(vi: &VIProblem<'_>, z_out: &[f64], z: &[f64]) -> Result<f64> {
    let d = vi.dim();
    if z_out.len() != d {
        return Err(Error::dims(d, z_out.len()));
    }
    if z.len() != d {
        return Err(Error::dims(d, z.len()));
    }
    vi.set().check(vi.weight(), z)?;
    if z_out == z {
        return Ok(0.0);
    }
    Ok(vi.value(z_out) - vi.value(z) + dot(&vi.operator(z), &sub(z_out, z)))
}

/// Upper bound on the gap guaranteed for one solver pass:
/// `Σ_levels (4ʲ L/∏T² + 2ʲ M/∏T) · ½‖z_in - z‖²_P`, levels in schedule order.
pub fn gap_bound(vi: &VIProblem<'_>, schedule: &Schedule, z_in: &[f64], z: &[f64]) -> Result<f64> {
    schedule.check_len(vi.len())?;
    if z_in.len() != vi.dim() || z.len() != vi.dim() {
        return Err(Error::dims(vi.dim(), z_in.len().min(z.len())));
    }
    let r2 = 0.5 * vi.weight().norm_sq(&sub(z_in, z));
    let mut prod = 1.0;
    let mut pow4 = 1.0;
    let mut pow2 = 1.0;
    let mut total = 0.0;
    for (level, &c) in schedule.order.iter().enumerate() {
        prod *= schedule.t[level] as f64;
        pow4 *= 4.0;
        pow2 *= 2.0;
        let comp = &vi.components()[c];
        total += pow4 * comp.l / (prod * prod) + pow2 * comp.m / prod;
    }
    Ok(total * r2)
}
