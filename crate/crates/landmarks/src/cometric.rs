//! Cometric models: manifolds presented by the inverse metric tensor.
//!
//! A model supplies `g^{ij}(x)` and, when available, analytic first and
//! second partials. Models without analytic partials fall back to central
//! finite differences; [`FiniteDifference`] forces that fallback with
//! explicit steps, which is how the analytic landmark partials are verified.

use nalgebra::DMatrix;
use ndarray::{Array3, Array4};

use crate::kernels::{grad_k, hess_k, RadialKernel};
use crate::manifold::Landmarks;

/// A manifold chart presented by its cometric.
pub trait Cometric {
    /// Chart dimension `n`.
    fn dim(&self) -> usize;

    /// Cometric matrix `g^{ij}(x)`, symmetric positive definite.
    fn co(&self, x: &[f64]) -> DMatrix<f64>;

    /// First partials `[i, j, k] = ∂_k g^{ij}(x)`.
    fn co_d1(&self, x: &[f64]) -> Array3<f64> {
        fd_co_d1(self, x, fd_step_d1(x))
    }

    /// Second partials `[i, j, k, l] = ∂²_{kl} g^{ij}(x)`.
    fn co_d2(&self, x: &[f64]) -> Array4<f64> {
        fd_co_d2(self, x, FD_STEP_D2)
    }
}

impl<M: Cometric + ?Sized> Cometric for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn co(&self, x: &[f64]) -> DMatrix<f64> {
        (**self).co(x)
    }
    fn co_d1(&self, x: &[f64]) -> Array3<f64> {
        (**self).co_d1(x)
    }
    fn co_d2(&self, x: &[f64]) -> Array4<f64> {
        (**self).co_d2(x)
    }
}

/// Default first-derivative step `1e-4 (1 + ‖x‖)`.
pub fn fd_step_d1(x: &[f64]) -> f64 {
    1e-4 * (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// Default second-derivative step.
pub const FD_STEP_D2: f64 = 1e-3;

/// Central differences of the cometric entries.
pub fn fd_co_d1<M: Cometric + ?Sized>(model: &M, x: &[f64], h: f64) -> Array3<f64> {
    let n = model.dim();
    let mut out = Array3::zeros((n, n, n));
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    for k in 0..n {
        xp[k] = x[k] + h;
        xm[k] = x[k] - h;
        let diff = (model.co(&xp) - model.co(&xm)) / (2.0 * h);
        for i in 0..n {
            for j in 0..n {
                out[[i, j, k]] = diff[(i, j)];
            }
        }
        xp[k] = x[k];
        xm[k] = x[k];
    }
    out
}

/// Central second differences, symmetric in `(k, l)` by construction.
pub fn fd_co_d2<M: Cometric + ?Sized>(model: &M, x: &[f64], h: f64) -> Array4<f64> {
    let n = model.dim();
    let mut out = Array4::zeros((n, n, n, n));
    let base = model.co(x);
    let mut pt = x.to_vec();
    let eval = |pt: &mut Vec<f64>, k: usize, dk: f64, l: usize, dl: f64| {
        pt[k] += dk;
        pt[l] += dl;
        let m = model.co(pt);
        pt[k] = x[k];
        pt[l] = x[l];
        m
    };
    for k in 0..n {
        let fp = eval(&mut pt, k, h, k, 0.0);
        let fm = eval(&mut pt, k, -h, k, 0.0);
        let diag = (fp + fm - &base * 2.0) / (h * h);
        for i in 0..n {
            for j in 0..n {
                out[[i, j, k, k]] = diag[(i, j)];
            }
        }
        for l in (k + 1)..n {
            let pp = eval(&mut pt, k, h, l, h);
            let pm = eval(&mut pt, k, h, l, -h);
            let mp = eval(&mut pt, k, -h, l, h);
            let mm = eval(&mut pt, k, -h, l, -h);
            let cross = (pp - pm - mp + mm) / (4.0 * h * h);
            for i in 0..n {
                for j in 0..n {
                    out[[i, j, k, l]] = cross[(i, j)];
                    out[[i, j, l, k]] = cross[(i, j)];
                }
            }
        }
    }
    out
}

/// Forces finite-difference partials with explicit steps, regardless of the
/// wrapped model's analytic implementations.
pub struct FiniteDifference<M> {
    pub model: M,
    pub h1: f64,
    pub h2: f64,
}

impl<M: Cometric> FiniteDifference<M> {
    pub fn new(model: M, h1: f64, h2: f64) -> Self {
        FiniteDifference { model, h1, h2 }
    }
}

impl<M: Cometric> Cometric for FiniteDifference<M> {
    fn dim(&self) -> usize {
        self.model.dim()
    }
    fn co(&self, x: &[f64]) -> DMatrix<f64> {
        self.model.co(x)
    }
    fn co_d1(&self, x: &[f64]) -> Array3<f64> {
        fd_co_d1(&self.model, x, self.h1)
    }
    fn co_d2(&self, x: &[f64]) -> Array4<f64> {
        fd_co_d2(&self.model, x, self.h2)
    }
}

/// Flat `R^n`: constant identity cometric.
pub struct Euclidean {
    pub dim: usize,
}

impl Cometric for Euclidean {
    fn dim(&self) -> usize {
        self.dim
    }
    fn co(&self, _x: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(self.dim, self.dim)
    }
    fn co_d1(&self, _x: &[f64]) -> Array3<f64> {
        Array3::zeros((self.dim, self.dim, self.dim))
    }
    fn co_d2(&self, _x: &[f64]) -> Array4<f64> {
        Array4::zeros((self.dim, self.dim, self.dim, self.dim))
    }
}

/// Round sphere of radius `r` in the stereographic chart: the metric is
/// `4r²/(1+‖x‖²)² I`, so the cometric is `(1+‖x‖²)²/(4r²) I` and every
/// section has curvature `1/r²`.
pub struct Sphere {
    pub radius: f64,
    pub dim: usize,
}

impl Sphere {
    fn u(&self, x: &[f64]) -> f64 {
        1.0 + x.iter().map(|v| v * v).sum::<f64>()
    }
}

impl Cometric for Sphere {
    fn dim(&self) -> usize {
        self.dim
    }
    fn co(&self, x: &[f64]) -> DMatrix<f64> {
        let u = self.u(x);
        DMatrix::identity(self.dim, self.dim) * (u * u / (4.0 * self.radius * self.radius))
    }
    fn co_d1(&self, x: &[f64]) -> Array3<f64> {
        let n = self.dim;
        let r2 = self.radius * self.radius;
        let u = self.u(x);
        let mut out = Array3::zeros((n, n, n));
        for i in 0..n {
            for k in 0..n {
                out[[i, i, k]] = u * x[k] / r2;
            }
        }
        out
    }
    fn co_d2(&self, x: &[f64]) -> Array4<f64> {
        let n = self.dim;
        let r2 = self.radius * self.radius;
        let u = self.u(x);
        let mut out = Array4::zeros((n, n, n, n));
        for i in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = 2.0 * x[k] * x[l] / r2;
                    if k == l {
                        v += u / r2;
                    }
                    out[[i, i, k, l]] = v;
                }
            }
        }
        out
    }
}

/// Hyperbolic upper half-space `{x : x_{n-1} > 0}` with cometric
/// `x_{n-1}² I`; constant curvature `-1`.
pub struct HalfSpace {
    pub dim: usize,
}

impl Cometric for HalfSpace {
    fn dim(&self) -> usize {
        self.dim
    }
    fn co(&self, x: &[f64]) -> DMatrix<f64> {
        let y = x[self.dim - 1];
        DMatrix::identity(self.dim, self.dim) * (y * y)
    }
    fn co_d1(&self, x: &[f64]) -> Array3<f64> {
        let n = self.dim;
        let y = x[n - 1];
        let mut out = Array3::zeros((n, n, n));
        for i in 0..n {
            out[[i, i, n - 1]] = 2.0 * y;
        }
        out
    }
    fn co_d2(&self, _x: &[f64]) -> Array4<f64> {
        let n = self.dim;
        let mut out = Array4::zeros((n, n, n, n));
        for i in 0..n {
            out[[i, i, n - 1, n - 1]] = 2.0;
        }
        out
    }
}

/// The landmark manifold as a generic cometric model on `R^{N·D}`.
///
/// Chart coordinates flatten the configuration row-major: landmark `a`,
/// coordinate `i` sits at index `a·D + i`. The analytic partials come from
/// the kernel gradient/Hessian and are extremely sparse: the `(ai)(bj)`
/// entry depends only on `q^a` and `q^b`.
pub struct LandmarkCometric<K> {
    landmark_count: usize,
    ambient_dim: usize,
    kernel: K,
}

impl<K: RadialKernel> LandmarkCometric<K> {
    pub fn new(landmark_count: usize, ambient_dim: usize, kernel: K) -> Self {
        LandmarkCometric {
            landmark_count,
            ambient_dim,
            kernel,
        }
    }

    fn config(&self, x: &[f64]) -> Landmarks {
        let m = DMatrix::from_row_slice(self.landmark_count, self.ambient_dim, x);
        Landmarks::new(m).expect("chart point is a valid configuration")
    }

    /// Flatten an `N×D` array into chart coordinates.
    pub fn flatten(rows: &DMatrix<f64>) -> Vec<f64> {
        let mut out = Vec::with_capacity(rows.nrows() * rows.ncols());
        for a in 0..rows.nrows() {
            for i in 0..rows.ncols() {
                out.push(rows[(a, i)]);
            }
        }
        out
    }
}

impl<K: RadialKernel> Cometric for LandmarkCometric<K> {
    fn dim(&self) -> usize {
        self.landmark_count * self.ambient_dim
    }

    fn co(&self, x: &[f64]) -> DMatrix<f64> {
        let (n, d) = (self.landmark_count, self.ambient_dim);
        let lm = self.config(x);
        let mut out = DMatrix::zeros(n * d, n * d);
        for a in 0..n {
            for b in 0..n {
                let g = if a == b {
                    self.kernel.gamma0()
                } else {
                    self.kernel.gamma(lm.separation(a, b))
                };
                for i in 0..d {
                    out[(a * d + i, b * d + i)] = g;
                }
            }
        }
        out
    }

    fn co_d1(&self, x: &[f64]) -> Array3<f64> {
        let (n, d) = (self.landmark_count, self.ambient_dim);
        let lm = self.config(x);
        let mut out = Array3::zeros((n * d, n * d, n * d));
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let grad = grad_k(&self.kernel, &lm.offset(a, b));
                for i in 0..d {
                    for k in 0..d {
                        out[[a * d + i, b * d + i, a * d + k]] = grad[k];
                        out[[a * d + i, b * d + i, b * d + k]] = -grad[k];
                    }
                }
            }
        }
        out
    }

    fn co_d2(&self, x: &[f64]) -> Array4<f64> {
        let (n, d) = (self.landmark_count, self.ambient_dim);
        let lm = self.config(x);
        let mut out = Array4::zeros((n * d, n * d, n * d, n * d));
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let hess = hess_k(&self.kernel, &lm.offset(a, b));
                for i in 0..d {
                    for k in 0..d {
                        for l in 0..d {
                            let h = hess[(k, l)];
                            out[[a * d + i, b * d + i, a * d + k, a * d + l]] = h;
                            out[[a * d + i, b * d + i, a * d + k, b * d + l]] = -h;
                            out[[a * d + i, b * d + i, b * d + k, a * d + l]] = -h;
                            out[[a * d + i, b * d + i, b * d + k, b * d + l]] = h;
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Kernel;

    #[test]
    fn fd_partials_vanish_on_constant_cometric() {
        let model = Euclidean { dim: 3 };
        let x = [0.3, -0.2, 1.0];
        let d1 = fd_co_d1(&model, &x, 1e-4);
        let d2 = fd_co_d2(&model, &x, 1e-3);
        assert!(d1.iter().all(|&v| v == 0.0));
        assert!(d2.iter().all(|&v| v == 0.0));
    }

    /// Cometric with quadratic entries: central stencils are exact on these.
    struct Quadratic;

    impl Cometric for Quadratic {
        fn dim(&self) -> usize {
            2
        }
        fn co(&self, x: &[f64]) -> DMatrix<f64> {
            DMatrix::from_row_slice(
                2,
                2,
                &[
                    5.0 + x[0] * x[0] + 0.5 * x[0] * x[1],
                    x[1] * x[1] - x[0] * x[1],
                    x[1] * x[1] - x[0] * x[1],
                    4.0 + 2.0 * x[1] * x[1],
                ],
            )
        }
    }

    #[test]
    fn fd_second_differences_exact_on_quadratics() {
        let x = [0.7, -0.4];
        let d2 = fd_co_d2(&Quadratic, &x, 1e-3);
        // ∂²(x0²)/∂x0² = 2, ∂²(0.5 x0 x1)/∂x0∂x1 = 0.5, etc.; exact up to
        // the rounding floor ulp/h² ≈ 1e-9 of the stencil
        assert!((d2[[0, 0, 0, 0]] - 2.0).abs() < 1e-8);
        assert!((d2[[0, 0, 0, 1]] - 0.5).abs() < 1e-8);
        assert!((d2[[0, 1, 0, 1]] + 1.0).abs() < 1e-8);
        assert!((d2[[1, 1, 1, 1]] - 4.0).abs() < 1e-8);
        assert!((d2[[0, 0, 1, 1]] - 0.0).abs() < 1e-8);
    }

    #[test]
    fn landmark_fd_matches_analytic_partials() {
        let kernel = Kernel::gaussian(1.0).unwrap();
        let model = LandmarkCometric::new(3, 2, kernel);
        let x = [0.0, 0.0, 1.1, 0.2, -0.4, 0.9];
        let analytic1 = model.co_d1(&x);
        let analytic2 = model.co_d2(&x);
        let fd = FiniteDifference::new(&model, 1e-4, 1e-3);
        let fd1 = fd.co_d1(&x);
        let fd2 = fd.co_d2(&x);
        let max1 = (&analytic1 - &fd1)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let max2 = (&analytic2 - &fd2)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max1 < 1e-5, "first partials differ by {max1}");
        assert!(max2 < 1e-5, "second partials differ by {max2}");
    }

    #[test]
    fn landmark_cometric_has_block_structure() {
        let kernel = Kernel::gaussian(1.0).unwrap();
        let model = LandmarkCometric::new(2, 2, kernel);
        let x = [0.0, 0.0, 1.0, 0.0];
        let q = model.co(&x);
        let g01 = kernel.gamma(1.0);
        assert!((q[(0, 2)] - g01).abs() < 1e-15);
        assert!((q[(1, 3)] - g01).abs() < 1e-15);
        assert_eq!(q[(0, 3)], 0.0);
        assert_eq!(q[(0, 1)], 0.0);
        assert_eq!(q[(0, 0)], 1.0);
    }

    #[test]
    fn sphere_and_halfspace_analytic_partials_match_fd() {
        let sphere = Sphere {
            radius: 1.5,
            dim: 2,
        };
        let x = [0.4, -0.3];
        let fd = FiniteDifference::new(&sphere, 1e-5, 1e-4);
        let e1 = (&sphere.co_d1(&x) - &fd.co_d1(&x))
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let e2 = (&sphere.co_d2(&x) - &fd.co_d2(&x))
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(e1 < 1e-8 && e2 < 1e-6, "sphere: {e1} {e2}");

        let half = HalfSpace { dim: 2 };
        let x = [0.2, 1.3];
        let fd = FiniteDifference::new(&half, 1e-5, 1e-4);
        let e1 = (&half.co_d1(&x) - &fd.co_d1(&x))
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let e2 = (&half.co_d2(&x) - &fd.co_d2(&x))
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(e1 < 1e-8 && e2 < 1e-6, "half-space: {e1} {e2}");
    }
}
