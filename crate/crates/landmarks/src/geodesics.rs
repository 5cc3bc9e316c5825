//! Hamiltonian geodesic shooting on the landmark manifold.
//!
//! The cogeodesic flow of `H(p,q) = ½ Σ K(q^a - q^b) ⟨p_a, p_b⟩` is
//!
//! ```text
//!   q̇^a = Σ_b K^{ab} p_b
//!   ṗ_a = -Σ_b ∇K^{ab} ⟨p_a, p_b⟩
//! ```
//!
//! integrated with fixed-step classical RK4 so runs are deterministic.
//! A landmark whose momentum starts at exactly zero keeps it at exactly
//! zero: the integrator masks those rows structurally.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernels::{grad_k, RadialKernel};
use crate::manifold::{self, Covector, Landmarks, Tangent, SEPARATION_FLOOR};

/// Time-sampled geodesic with conservation diagnostics.
#[derive(Clone, Debug)]
pub struct GeodesicPath {
    pub times: Vec<f64>,
    pub q_samples: Vec<DMatrix<f64>>,
    pub p_samples: Vec<DMatrix<f64>>,
    pub hamiltonian_samples: Vec<f64>,
}

impl GeodesicPath {
    /// Relative Hamiltonian drift `max_t |H(t) - H(0)| / |H(0)|`.
    pub fn hamiltonian_drift(&self) -> f64 {
        let h0 = self.hamiltonian_samples[0];
        let scale = if h0 == 0.0 { 1.0 } else { h0.abs() };
        self.hamiltonian_samples
            .iter()
            .map(|h| (h - h0).abs() / scale)
            .fold(0.0, f64::max)
    }

    /// Relative drift of the total linear momentum `Σ_a p_a`.
    pub fn momentum_drift(&self) -> f64 {
        let total = |p: &DMatrix<f64>| -> DVector<f64> {
            let mut t = DVector::zeros(p.ncols());
            for a in 0..p.nrows() {
                t += p.row(a).transpose();
            }
            t
        };
        let t0 = total(&self.p_samples[0]);
        let scale = if t0.norm() == 0.0 { 1.0 } else { t0.norm() };
        self.p_samples
            .iter()
            .map(|p| (total(p) - &t0).norm() / scale)
            .fold(0.0, f64::max)
    }
}

/// `H(p, q) = ½ Σ_{ab} K^{ab} ⟨p_a, p_b⟩`.
pub fn hamiltonian(landmarks: &Landmarks, kernel: &impl RadialKernel, p: &Covector) -> f64 {
    0.5 * manifold::cometric_pair(landmarks, kernel, p, p)
}

fn hamiltonian_raw(q: &DMatrix<f64>, kernel: &impl RadialKernel, p: &DMatrix<f64>) -> f64 {
    let n = q.nrows();
    let mut sum = 0.0;
    for a in 0..n {
        for b in 0..n {
            let g = if a == b {
                kernel.gamma0()
            } else {
                kernel.gamma((q.row(a) - q.row(b)).norm())
            };
            sum += g * p.row(a).dot(&p.row(b));
        }
    }
    0.5 * sum
}

fn rhs_raw(
    q: &DMatrix<f64>,
    p: &DMatrix<f64>,
    kernel: &impl RadialKernel,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n, d) = (q.nrows(), q.ncols());
    let mut qdot = DMatrix::zeros(n, d);
    let mut pdot = DMatrix::zeros(n, d);
    for a in 0..n {
        for b in 0..n {
            let offset = (q.row(a) - q.row(b)).transpose();
            let g = if a == b {
                kernel.gamma0()
            } else {
                kernel.gamma(offset.norm())
            };
            for i in 0..d {
                qdot[(a, i)] += g * p[(b, i)];
            }
            if a != b {
                let grad = grad_k(kernel, &offset);
                let pp = p.row(a).dot(&p.row(b));
                for i in 0..d {
                    pdot[(a, i)] -= grad[i] * pp;
                }
            }
        }
    }
    (qdot, pdot)
}

/// One evaluation of the cogeodesic vector field.
pub fn ham_rhs(
    landmarks: &Landmarks,
    kernel: &impl RadialKernel,
    p: &Covector,
) -> (Tangent, Covector) {
    let (qdot, pdot) = rhs_raw(landmarks.points(), &p.0, kernel);
    (Tangent(qdot), Covector(pdot))
}

/// Shoot a geodesic from `(q₀, p₀)` over `[0, t_end]` with `steps` RK4
/// steps. Stops with a diagnostic if two landmarks come closer than the
/// default separation floor `1e-8 · scale`.
pub fn integrate(
    landmarks0: &Landmarks,
    p0: &Covector,
    kernel: &impl RadialKernel,
    t_end: f64,
    steps: usize,
) -> Result<GeodesicPath> {
    integrate_with_separation_floor(
        landmarks0,
        p0,
        kernel,
        t_end,
        steps,
        SEPARATION_FLOOR * kernel.scale(),
    )
}

/// [`integrate`] with an explicit collision guard.
pub fn integrate_with_separation_floor(
    landmarks0: &Landmarks,
    p0: &Covector,
    kernel: &impl RadialKernel,
    t_end: f64,
    steps: usize,
    eps: f64,
) -> Result<GeodesicPath> {
    if steps == 0 {
        return Err(Error::Shape("integration needs at least one step".into()));
    }
    if p0.0.nrows() != landmarks0.count() || p0.0.ncols() != landmarks0.dim() {
        return Err(Error::Shape(
            "momentum shape must match configuration".into(),
        ));
    }
    let n = landmarks0.count();
    let zero_rows: Vec<usize> = (0..n)
        .filter(|&a| p0.0.row(a).iter().all(|&v| v == 0.0))
        .collect();
    let mask = |m: &mut DMatrix<f64>| {
        for &a in &zero_rows {
            m.row_mut(a).fill(0.0);
        }
    };

    let h = t_end / steps as f64;
    let mut q = landmarks0.points().clone();
    let mut p = p0.0.clone();

    let mut path = GeodesicPath {
        times: Vec::with_capacity(steps + 1),
        q_samples: Vec::with_capacity(steps + 1),
        p_samples: Vec::with_capacity(steps + 1),
        hamiltonian_samples: Vec::with_capacity(steps + 1),
    };
    let check_sep = |q: &DMatrix<f64>, t: f64| -> Result<()> {
        let lm = Landmarks::new(q.clone()).map_err(|_| Error::IntegrationStopped {
            time: t,
            reason: "non-finite state".into(),
        })?;
        if lm.count() > 1 && lm.min_separation() < eps {
            return Err(Error::IntegrationStopped {
                time: t,
                reason: format!("landmarks closer than separation floor {eps:.3e}"),
            });
        }
        Ok(())
    };

    check_sep(&q, 0.0)?;
    path.times.push(0.0);
    path.q_samples.push(q.clone());
    path.p_samples.push(p.clone());
    path.hamiltonian_samples
        .push(hamiltonian_raw(&q, kernel, &p));

    for step in 0..steps {
        let stage =
            |dq: &DMatrix<f64>, dp: &DMatrix<f64>, f: f64| (&q + dq * (h * f), &p + dp * (h * f));
        let (k1q, mut k1p) = rhs_raw(&q, &p, kernel);
        mask(&mut k1p);
        let (q2, p2) = stage(&k1q, &k1p, 0.5);
        let (k2q, mut k2p) = rhs_raw(&q2, &p2, kernel);
        mask(&mut k2p);
        let (q3, p3) = stage(&k2q, &k2p, 0.5);
        let (k3q, mut k3p) = rhs_raw(&q3, &p3, kernel);
        mask(&mut k3p);
        let (q4, p4) = stage(&k3q, &k3p, 1.0);
        let (k4q, mut k4p) = rhs_raw(&q4, &p4, kernel);
        mask(&mut k4p);

        q += (k1q + k2q * 2.0 + k3q * 2.0 + k4q) * (h / 6.0);
        p += (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (h / 6.0);
        mask(&mut p);

        let t = (step + 1) as f64 * h;
        check_sep(&q, t)?;
        path.times.push(t);
        path.q_samples.push(q.clone());
        path.p_samples.push(p.clone());
        path.hamiltonian_samples
            .push(hamiltonian_raw(&q, kernel, &p));
    }
    Ok(path)
}

fn interp(a: &DMatrix<f64>, b: &DMatrix<f64>, w: f64) -> DMatrix<f64> {
    a * (1.0 - w) + b * w
}

fn field_at(
    q: &DMatrix<f64>,
    p: &DMatrix<f64>,
    kernel: &impl RadialKernel,
    x: &DVector<f64>,
) -> DVector<f64> {
    let d = q.ncols();
    let mut v = DVector::zeros(d);
    for b in 0..q.nrows() {
        let offset = x - q.row(b).transpose();
        v += p.row(b).transpose() * kernel.gamma(offset.norm());
    }
    v
}

/// Advect passive points under the velocity field induced by a geodesic:
/// `ẋ = Σ_b K(x - q^b(t)) p_b(t)`, with `(q, p)` interpolated linearly
/// within each recorded step. Returns one `M×D` sample per path time.
pub fn advect(
    path: &GeodesicPath,
    kernel: &impl RadialKernel,
    passive: &DMatrix<f64>,
) -> Vec<DMatrix<f64>> {
    let m = passive.nrows();
    let d = passive.ncols();
    let mut current = passive.clone();
    let mut samples = Vec::with_capacity(path.times.len());
    samples.push(current.clone());

    for i in 0..path.times.len() - 1 {
        let h = path.times[i + 1] - path.times[i];
        let (q0, p0) = (&path.q_samples[i], &path.p_samples[i]);
        let (q1, p1) = (&path.q_samples[i + 1], &path.p_samples[i + 1]);
        let qm = interp(q0, q1, 0.5);
        let pm = interp(p0, p1, 0.5);

        let mut next = DMatrix::zeros(m, d);
        for j in 0..m {
            let x = current.row(j).transpose();
            let k1 = field_at(q0, p0, kernel, &x);
            let k2 = field_at(&qm, &pm, kernel, &(&x + &k1 * (0.5 * h)));
            let k3 = field_at(&qm, &pm, kernel, &(&x + &k2 * (0.5 * h)));
            let k4 = field_at(q1, p1, kernel, &(&x + &k3 * h));
            let xn = &x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            next.set_row(j, &xn.transpose());
        }
        current = next;
        samples.push(current.clone());
    }
    samples
}
