//! Dense linear algebra at desk scale.
//!
//! Vectors are plain `Vec<f64>` / `&[f64]`; [`Mat`] is a row-major dense
//! matrix. Everything here is small-dimension code: Gaussian elimination,
//! cyclic Jacobi for symmetric eigenproblems and one-sided (Hestenes) Jacobi
//! for singular values and null spaces.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Relative rank cut used by [`kernel_basis`] and the least-norm solver.
pub const RANK_TOL: f64 = 1e-10;
/// Off-diagonal threshold (relative to the Frobenius norm) for cyclic Jacobi.
pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Pivot cut for [`solve_linear`], relative to the largest entry of `A`.
pub const PIVOT_TOL: f64 = 1e-12;
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Mat::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::dims(rows * cols, data.len()));
        }
        Ok(Mat { rows, cols, data })
    }

    /// Builds a matrix from equally long rows. An empty slice gives a 0x0 matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::dims(cols, r.len()));
            }
            data.extend_from_slice(r);
        }
        Ok(Mat { rows: rows.len(), cols, data })
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        let mut m = Mat::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            for i in 0..rows {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `A v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `Aᵀ w`.
    pub fn tr_mul_vec(&self, w: &[f64]) -> Vec<f64> {
        debug_assert_eq!(w.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &wi) in w.iter().enumerate() {
            if wi != 0.0 {
                axpy(wi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn matmul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(Error::dims(self.cols, other.rows));
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// `AᵀA`, symmetric by construction.
    pub fn gram(&self) -> Mat {
        let t = self.transpose();
        let mut g = t.matmul(self).expect("shapes agree");
        g.symmetrize();
        g
    }

    /// `AAᵀ`, symmetric by construction.
    pub fn outer_gram(&self) -> Mat {
        let mut g = self.matmul(&self.transpose()).expect("shapes agree");
        g.symmetrize();
        g
    }

    /// Replaces `A` with `(A + Aᵀ)/2`. Square matrices only.
    pub fn symmetrize(&mut self) {
        assert!(self.is_square());
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                let m = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = m;
                self[(j, i)] = m;
            }
        }
    }

    pub fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|x| *x *= c);
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        norm(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Kronecker product `self ⊗ I_d`.
    pub fn kron_identity(&self, d: usize) -> Mat {
        let mut out = Mat::zeros(self.rows * d, self.cols * d);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self[(i, j)];
                if v != 0.0 {
                    for a in 0..d {
                        out[(i * d + a, j * d + a)] = v;
                    }
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

// ---------------------------------------------------------------------------
// vector helpers

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// `y += a x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scaled(c: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| c * x).collect()
}

/// `t a + (1 - t) b`
pub fn lerp(t: f64, a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| t * x + (1.0 - t) * y).collect()
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

pub fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

// ---------------------------------------------------------------------------
// P-weighted geometry

/// Positive diagonal weight `P` defining `‖z‖²_P = Σ Pᵢ zᵢ²`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagWeight(Vec<f64>);

impl DiagWeight {
    pub fn new(diag: Vec<f64>) -> Result<Self> {
        if let Some(bad) = diag.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(Error::InvalidInstance(format!("weight entries must be finite and positive, got {bad}")));
        }
        Ok(DiagWeight(diag))
    }

    pub fn identity(n: usize) -> Self {
        DiagWeight(vec![1.0; n])
    }

    /// `diag(a I_{n_a}, b I_{n_b})`.
    pub fn two_blocks(n_a: usize, a: f64, n_b: usize, b: f64) -> Result<Self> {
        let mut d = vec![a; n_a];
        d.extend(std::iter::repeat_n(b, n_b));
        DiagWeight::new(d)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, u: &[f64], v: &[f64]) -> f64 {
        self.0.iter().zip(u).zip(v).map(|((p, a), b)| p * a * b).sum()
    }

    pub fn norm_sq(&self, u: &[f64]) -> f64 {
        self.dot(u, u)
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.norm_sq(u).sqrt()
    }

    /// Dual norm `‖g‖²_{P⁻¹} = Σ gᵢ²/Pᵢ`.
    pub fn dual_norm_sq(&self, g: &[f64]) -> f64 {
        self.0.iter().zip(g).map(|(p, x)| x * x / p).sum()
    }

    pub fn dual_norm(&self, g: &[f64]) -> f64 {
        self.dual_norm_sq(g).sqrt()
    }

    /// `P⁻¹ g / h`, elementwise.
    pub fn solve_scaled(&self, h: f64, g: &[f64]) -> Vec<f64> {
        self.0.iter().zip(g).map(|(p, x)| x / (h * p)).collect()
    }
}

pub fn weighted_dot(u: &[f64], v: &[f64], p: &DiagWeight) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::dims(u.len(), v.len()));
    }
    if u.len() != p.dim() {
        return Err(Error::dims(p.dim(), u.len()));
    }
    Ok(p.dot(u, v))
}

// ---------------------------------------------------------------------------
// linear solves

/// Gaussian elimination with partial pivoting.
pub fn solve_linear(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::dims(a.rows(), a.cols()));
    }
    let n = a.rows();
    if b.len() != n {
        return Err(Error::dims(n, b.len()));
    }
    let scale = a.max_abs();
    let cut = PIVOT_TOL * scale;
    let mut m = a.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let (piv, pmax) =
            (k..n).map(|i| (i, m[(i, k)].abs())).fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax <= cut || pmax == 0.0 {
            return Err(Error::Singular { pivot: pmax });
        }
        if piv != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(piv, j)];
                m[(piv, j)] = tmp;
            }
            x.swap(k, piv);
        }
        let d = m[(k, k)];
        for i in k + 1..n {
            let f = m[(i, k)] / d;
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[(i, j)] -= f * m[(k, j)];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[(k, j)] * x[j]).sum();
        x[k] = (x[k] - s) / m[(k, k)];
    }
    if !all_finite(&x) {
        return Err(Error::NonFinite("solve_linear".into()));
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// symmetric eigenproblem

fn check_symmetric(s: &Mat) -> Result<()> {
    if !s.is_square() {
        return Err(Error::dims(s.rows(), s.cols()));
    }
    let tol = SYMMETRY_TOL * s.max_abs().max(1.0);
    let mut worst: f64 = 0.0;
    for i in 0..s.rows() {
        for j in i + 1..s.cols() {
            worst = worst.max((s[(i, j)] - s[(j, i)]).abs());
        }
    }
    if worst > tol {
        return Err(Error::Asymmetric { asymmetry: worst });
    }
    Ok(())
}

/// Eigenvalues of a symmetric matrix in descending order.
pub fn sym_eigs(s: &Mat) -> Result<Vec<f64>> {
    sym_eigen(s).map(|(vals, _)| vals)
}

/// Cyclic Jacobi eigendecomposition. Returns eigenvalues in descending order
/// and the matching orthonormal eigenvectors as the columns of the matrix.
pub fn sym_eigen(s: &Mat) -> Result<(Vec<f64>, Mat)> {
    check_symmetric(s)?;
    let n = s.rows();
    let mut a = s.clone();
    a.symmetrize();
    let mut v = Mat::identity(n);
    let scale = a.frobenius();

    if scale > 0.0 {
        for _ in 0..JACOBI_MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)] * a[(i, j)])
                .sum::<f64>()
                .sqrt();
            if off <= JACOBI_TOL * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = if theta.abs() > 1e150 {
                        0.5 / theta
                    } else {
                        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                    };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * c;
                    a[(p, p)] -= t * apq;
                    a[(q, q)] += t * apq;
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    for r in 0..n {
                        if r != p && r != q {
                            let arp = a[(r, p)];
                            let arq = a[(r, q)];
                            let np = c * arp - sn * arq;
                            let nq = sn * arp + c * arq;
                            a[(r, p)] = np;
                            a[(p, r)] = np;
                            a[(r, q)] = nq;
                            a[(q, r)] = nq;
                        }
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = c * vrp - sn * vrq;
                        v[(r, q)] = sn * vrp + c * vrq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let vals = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vecs = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            vecs[(r, dst)] = v[(r, src)];
        }
    }
    Ok((vals, vecs))
}

// ---------------------------------------------------------------------------
// singular values, null spaces, least-norm solves

/// One-sided Jacobi factorization `A V = W` with `V` orthogonal and the
/// columns of `W` mutually orthogonal; `‖wⱼ‖` are the singular values.
#[derive(Clone, Debug)]
pub struct JacobiSvd {
    /// `‖wⱼ‖`, in column order (not sorted).
    pub sigma: Vec<f64>,
    /// Right singular vectors as columns.
    pub v: Mat,
    /// Columns `wⱼ = A vⱼ`.
    pub w: Vec<Vec<f64>>,
}

impl JacobiSvd {
    pub fn new(a: &Mat) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
        let mut v = Mat::identity(n);
        for _ in 0..JACOBI_MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let alpha = norm_sq(&w[p]);
                    let beta = norm_sq(&w[q]);
                    let gamma = dot(&w[p], &w[q]);
                    if alpha == 0.0 || beta == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = if zeta.abs() > 1e150 {
                        0.5 / zeta
                    } else {
                        zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    #[allow(clippy::needless_range_loop)]
                    for i in 0..m {
                        let (wp, wq) = (w[p][i], w[q][i]);
                        w[p][i] = c * wp - s * wq;
                        w[q][i] = s * wp + c * wq;
                    }
                    for i in 0..n {
                        let (vp, vq) = (v[(i, p)], v[(i, q)]);
                        v[(i, p)] = c * vp - s * vq;
                        v[(i, q)] = s * vp + c * vq;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let sigma = w.iter().map(|c| norm(c)).collect();
        JacobiSvd { sigma, v, w }
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.iter().fold(0.0, |m, s| m.max(*s))
    }

    /// Singular values in descending order. For an `m x n` matrix this has
    /// `n` entries; wide matrices contribute `n - m` structural zeros.
    pub fn sorted_singular_values(&self) -> Vec<f64> {
        let mut s = self.sigma.clone();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    fn cut(&self, rel_tol: f64) -> f64 {
        rel_tol * self.sigma_max()
    }
}

/// Singular values of `a`, descending; `min(rows, cols)` of them.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    let k = a.rows().min(a.cols());
    let mut s = if a.cols() <= a.rows() {
        JacobiSvd::new(a).sorted_singular_values()
    } else {
        JacobiSvd::new(&a.transpose()).sorted_singular_values()
    };
    s.truncate(k);
    s
}

/// Orthonormal basis of `ker A`, with rank decided at `RANK_TOL · σ_max`.
pub fn kernel_basis(a: &Mat) -> Vec<Vec<f64>> {
    kernel_basis_with_tol(a, RANK_TOL)
}

pub fn kernel_basis_with_tol(a: &Mat, rel_tol: f64) -> Vec<Vec<f64>> {
    if a.cols() == 0 {
        return Vec::new();
    }
    let svd = JacobiSvd::new(a);
    let cut = svd.cut(rel_tol);
    (0..a.cols()).filter(|&j| svd.sigma[j] <= cut).map(|j| svd.v.column(j)).collect()
}

/// Minimum-norm least-squares solution of `A x ≈ b`.
pub fn lstsq_min_norm(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::dims(a.rows(), b.len()));
    }
    let svd = JacobiSvd::new(a);
    let cut = svd.cut(RANK_TOL);
    let mut x = vec![0.0; a.cols()];
    for j in 0..a.cols() {
        let s = svd.sigma[j];
        if s > cut && s > 0.0 {
            let coef = dot(&svd.w[j], b) / (s * s);
            for (i, xi) in x.iter_mut().enumerate() {
                *xi += coef * svd.v[(i, j)];
            }
        }
    }
    Ok(x)
}

/// Projects `v` onto the orthogonal complement of the span of an
/// orthonormal `basis`.
pub fn project_out(v: &[f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut out = v.to_vec();
    for b in basis {
        let c = dot(b, v);
        axpy(-c, b, &mut out);
    }
    out
}
