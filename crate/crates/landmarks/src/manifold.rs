//! Metric and cometric data of the landmark manifold.
//!
//! A configuration of `N` labeled landmarks in `R^D` carries the cometric
//! `g^{(ai)(bj)} = K(q^a - q^b) δ^{ij}`: one `N×N` kernel Gram block repeated
//! over the `D` coordinate axes. The metric is its blockwise inverse, so
//! raising an index is a matrix product and lowering one is a linear solve.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernels::{grad_k, hess_k, RadialKernel};

/// Condition-number limit beyond which a Gram matrix is treated as
/// numerically singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Default separation floor, relative to the kernel scale.
pub const SEPARATION_FLOOR: f64 = 1e-8;

/// Smoothing parameter λ of the matching energy. `Exact` is λ = ∞, the
/// regime in which landmark trajectories follow the velocity field exactly;
/// all geodesic and curvature machinery assumes it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Smoothing {
    Exact,
    Finite(f64),
}

impl Smoothing {
    pub fn finite(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Shape(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(Smoothing::Finite(lambda))
    }

    /// The diagonal regularization `1/λ` (zero for exact matching).
    fn ridge(&self) -> f64 {
        match self {
            Smoothing::Exact => 0.0,
            Smoothing::Finite(lambda) => 1.0 / lambda,
        }
    }
}

/// `N` labeled landmark points in `R^D`, one row per landmark.
#[derive(Clone, Debug, PartialEq)]
pub struct Landmarks {
    points: DMatrix<f64>,
}

impl Landmarks {
    pub fn new(points: DMatrix<f64>) -> Result<Self> {
        if points.nrows() == 0 || points.ncols() == 0 {
            return Err(Error::Shape("landmark array must be non-empty".into()));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("landmark coordinates must be finite".into()));
        }
        Ok(Landmarks { points })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        matrix_from_rows(rows).and_then(Landmarks::new)
    }

    pub fn count(&self) -> usize {
        self.points.nrows()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    /// Position of landmark `a` as a column vector.
    pub fn point(&self, a: usize) -> DVector<f64> {
        self.points.row(a).transpose()
    }

    /// `q^a - q^b`.
    pub fn offset(&self, a: usize, b: usize) -> DVector<f64> {
        (self.points.row(a) - self.points.row(b)).transpose()
    }

    /// `‖q^a - q^b‖`.
    pub fn separation(&self, a: usize, b: usize) -> f64 {
        (self.points.row(a) - self.points.row(b)).norm()
    }

    /// Smallest pairwise distance (infinity for a single landmark).
    pub fn min_separation(&self) -> f64 {
        let n = self.count();
        let mut min = f64::INFINITY;
        for a in 0..n {
            for b in (a + 1)..n {
                min = min.min(self.separation(a, b));
            }
        }
        min
    }

    /// Error out when two landmarks are closer than `eps`.
    pub fn ensure_separated(&self, eps: f64) -> Result<()> {
        let min = self.min_separation();
        if min < eps {
            return Err(Error::Degenerate(format!(
                "minimum landmark separation {min:.3e} below floor {eps:.3e}"
            )));
        }
        Ok(())
    }
}

/// A cotangent vector: one momentum row `p_a` per landmark.
#[derive(Clone, Debug, PartialEq)]
pub struct Covector(pub DMatrix<f64>);

/// A tangent vector: one velocity row `v^a` per landmark.
#[derive(Clone, Debug, PartialEq)]
pub struct Tangent(pub DMatrix<f64>);

impl Covector {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        matrix_from_rows(rows).map(Covector)
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        Covector(DMatrix::zeros(n, d))
    }

    /// Momentum of landmark `a` as a column vector.
    pub fn row(&self, a: usize) -> DVector<f64> {
        self.0.row(a).transpose()
    }
}

impl Tangent {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        matrix_from_rows(rows).map(Tangent)
    }

    pub fn row(&self, a: usize) -> DVector<f64> {
        self.0.row(a).transpose()
    }
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(Error::Shape("array must have at least one row".into()));
    }
    let d = rows[0].len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Shape(
            "rows must be non-empty and rectangular".into(),
        ));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(rows.len(), d, &flat))
}

fn check_shape(landmarks: &Landmarks, m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.nrows() != landmarks.count() || m.ncols() != landmarks.dim() {
        return Err(Error::Shape(format!(
            "{what} must be {}x{}, got {}x{}",
            landmarks.count(),
            landmarks.dim(),
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Raw kernel matrix `K(q)_{ab} = γ(‖q^a - q^b‖)`, no regularization and no
/// conditioning check.
pub fn kernel_matrix(landmarks: &Landmarks, kernel: &impl RadialKernel) -> DMatrix<f64> {
    let n = landmarks.count();
    let mut m = DMatrix::zeros(n, n);
    for a in 0..n {
        m[(a, a)] = kernel.gamma0();
        for b in (a + 1)..n {
            let v = kernel.gamma(landmarks.separation(a, b));
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    m
}

/// Gram matrix `K(q) + I/λ`, validated to be symmetric positive definite
/// with condition number below [`CONDITION_LIMIT`].
pub fn gram(
    landmarks: &Landmarks,
    kernel: &impl RadialKernel,
    smoothing: Smoothing,
) -> Result<DMatrix<f64>> {
    let mut m = kernel_matrix(landmarks, kernel);
    let ridge = smoothing.ridge();
    for a in 0..landmarks.count() {
        m[(a, a)] += ridge;
    }
    let eigs = m.clone().symmetric_eigen().eigenvalues;
    let max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(Error::Degenerate(format!(
            "Gram matrix not positive definite (min eigenvalue {min:.3e})"
        )));
    }
    if max / min > CONDITION_LIMIT {
        return Err(Error::Degenerate(format!(
            "Gram matrix condition {:.3e} above limit {CONDITION_LIMIT:.1e}",
            max / min
        )));
    }
    Ok(m)
}

/// Cometric pairing `Σ_{a,b} γ(‖q^a - q^b‖) ⟨α_a, β_b⟩` (exact matching).
pub fn cometric_pair(
    landmarks: &Landmarks,
    kernel: &impl RadialKernel,
    alpha: &Covector,
    beta: &Covector,
) -> f64 {
    let n = landmarks.count();
    let mut sum = 0.0;
    for a in 0..n {
        for b in 0..n {
            let g = if a == b {
                kernel.gamma0()
            } else {
                kernel.gamma(landmarks.separation(a, b))
            };
            sum += g * alpha.0.row(a).dot(&beta.0.row(b));
        }
    }
    sum
}

/// Raise indices: `v^a = Σ_b K^{ab} α_b`.
pub fn sharp(landmarks: &Landmarks, kernel: &impl RadialKernel, alpha: &Covector) -> Tangent {
    let k = kernel_matrix(landmarks, kernel);
    Tangent(k * &alpha.0)
}

/// Lower indices: `p = (K(q) + I/λ)^{-1} v`, columnwise.
pub fn flat(
    landmarks: &Landmarks,
    kernel: &impl RadialKernel,
    smoothing: Smoothing,
    v: &Tangent,
) -> Result<Covector> {
    check_shape(landmarks, &v.0, "tangent")?;
    let g = gram(landmarks, kernel, smoothing)?;
    let chol = g
        .cholesky()
        .ok_or_else(|| Error::Degenerate("Gram Cholesky factorization failed".into()))?;
    Ok(Covector(chol.solve(&v.0)))
}

/// Scalar factor of the first cometric partial:
/// `∂ g^{(ai)(bj)} / ∂ q^{ck} = ∂_k K^{ab} (δ^a_c - δ^b_c) δ^{ij}`,
/// with the `δ^{ij}` left to the caller.
pub fn cometric_d1(
    landmarks: &Landmarks,
    kernel: &impl RadialKernel,
    a: usize,
    b: usize,
    c: usize,
    k: usize,
) -> f64 {
    if a == b || (c != a && c != b) {
        return 0.0;
    }
    let sign = if c == a { 1.0 } else { -1.0 };
    let g = grad_k(kernel, &landmarks.offset(a, b));
    sign * g[k]
}

/// Scalar factor of the second cometric partial:
/// `∂²_{kl} K^{ab} (δ^a_c - δ^b_c)(δ^a_d - δ^b_d) δ^{ij}`.
#[allow(clippy::too_many_arguments)]
pub fn cometric_d2(
    landmarks: &Landmarks,
    kernel: &impl RadialKernel,
    a: usize,
    b: usize,
    c: usize,
    d: usize,
    k: usize,
    l: usize,
) -> f64 {
    if a == b || (c != a && c != b) || (d != a && d != b) {
        return 0.0;
    }
    let sign_c = if c == a { 1.0 } else { -1.0 };
    let sign_d = if d == a { 1.0 } else { -1.0 };
    let h = hess_k(kernel, &landmarks.offset(a, b));
    sign_c * sign_d * h[(k, l)]
}

/// Path energy `∫ q̇ᵀ g(q) q̇ dt` by the trapezoid rule, with velocities
/// from central differences (one-sided at the endpoints).
pub fn path_energy(
    path: &[(f64, Landmarks)],
    kernel: &impl RadialKernel,
    smoothing: Smoothing,
) -> Result<f64> {
    if path.len() < 2 {
        return Err(Error::Shape("path needs at least two samples".into()));
    }
    for w in path.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::Shape(
                "path times must be strictly increasing".into(),
            ));
        }
        if w[1].1.count() != w[0].1.count() || w[1].1.dim() != w[0].1.dim() {
            return Err(Error::Shape("path samples must share one shape".into()));
        }
    }

    let m = path.len();
    let mut integrand = Vec::with_capacity(m);
    for i in 0..m {
        let (lo, hi) = match i {
            0 => (0, 1),
            _ if i == m - 1 => (m - 2, m - 1),
            _ => (i - 1, i + 1),
        };
        let dt = path[hi].0 - path[lo].0;
        let vel = (path[hi].1.points() - path[lo].1.points()) / dt;

        let g = gram(&path[i].1, kernel, smoothing)?;
        let chol = g
            .cholesky()
            .ok_or_else(|| Error::Degenerate("Gram Cholesky factorization failed".into()))?;
        // q̇ᵀ g q̇ with block-diagonal g: solve (K + I/λ) y = v per column.
        let y = chol.solve(&vel);
        integrand.push(vel.zip_fold(&y, 0.0, |acc, a, b| acc + a * b));
    }

    let mut energy = 0.0;
    for i in 1..m {
        let dt = path[i].0 - path[i - 1].0;
        energy += 0.5 * dt * (integrand[i] + integrand[i - 1]);
    }
    Ok(energy)
}

/// The interpolating velocity field `α^hor(x) = Σ_b K(x - q^b) α_b` and its
/// spatial derivative matrix with entries `(i, j) ↦ ∂_i α^hor_j(x)`.
pub fn horizontal_field(
    landmarks: &Landmarks,
    kernel: &impl RadialKernel,
    alpha: &Covector,
    x: &DVector<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    let d = landmarks.dim();
    let mut value = DVector::zeros(d);
    let mut deriv = DMatrix::zeros(d, d);
    for b in 0..landmarks.count() {
        let offset = x - landmarks.point(b);
        let alpha_b = alpha.row(b);
        value += &alpha_b * kernel.gamma(offset.norm());
        deriv += grad_k(kernel, &offset) * alpha_b.transpose();
    }
    (value, deriv)
}
