//! Sectional curvature of the landmark manifold in closed form.
//!
//! The numerator splits into four terms built from a handful of geometric
//! quantities: the *mixed force* `F_a(α,β)` (gradient of the cometric
//! pairing), the *discrete vector strain* `S^{ab}` (difference of lifted
//! velocities), the *scalar compression* `C^{ab}` (strain against the
//! kernel gradient), and the *landmark derivative* `D^a(α,β)`. All sums
//! over pairs skip `a = b`, where every summand vanishes.

use nalgebra::{DMatrix, DVector};
use ndarray::Array3;

use crate::curvature::CurvatureReport;
use crate::error::Result;
use crate::kernels::{grad_k, hess_k, RadialKernel};
use crate::manifold::{self, Covector, Landmarks, Smoothing};

/// Mixed force `F_{ai} = ½ Σ_b ∂_i K^{ab} (⟨α_a,β_b⟩ + ⟨β_a,α_b⟩)`,
/// symmetric in `(α, β)`.
pub fn mixed_force(
    landmarks: &Landmarks,
    kernel: &impl RadialKernel,
    alpha: &Covector,
    beta: &Covector,
) -> DMatrix<f64> {
    let (n, d) = (landmarks.count(), landmarks.dim());
    let mut force = DMatrix::zeros(n, d);
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let grad = grad_k(kernel, &landmarks.offset(a, b));
            let pairing = alpha.0.row(a).dot(&beta.0.row(b)) + beta.0.row(a).dot(&alpha.0.row(b));
            for i in 0..d {
                force[(a, i)] += 0.5 * grad[i] * pairing;
            }
        }
    }
    force
}

/// Discrete vector strain `S^{ab}(α) = (α♯)^a - (α♯)^b` as an `N×N×D`
/// array, antisymmetric in `(a, b)`.
pub fn strain(landmarks: &Landmarks, kernel: &impl RadialKernel, alpha: &Covector) -> Array3<f64> {
    let (n, d) = (landmarks.count(), landmarks.dim());
    let v = manifold::sharp(landmarks, kernel, alpha).0;
    let mut s = Array3::zeros((n, n, d));
    for a in 0..n {
        for b in 0..n {
            for i in 0..d {
                s[[a, b, i]] = v[(a, i)] - v[(b, i)];
            }
        }
    }
    s
}

/// Scalar compressions `C^{ab}(α) = ⟨S^{ab}(α), ∇K^{ab}⟩`, symmetric with
/// zero diagonal.
pub fn compression(
    landmarks: &Landmarks,
    kernel: &impl RadialKernel,
    alpha: &Covector,
) -> DMatrix<f64> {
    let n = landmarks.count();
    let v = manifold::sharp(landmarks, kernel, alpha).0;
    let mut c = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let grad = grad_k(kernel, &landmarks.offset(a, b));
            let s_ab = (v.row(a) - v.row(b)).transpose();
            let val = s_ab.dot(&grad);
            c[(a, b)] = val;
            c[(b, a)] = val;
        }
    }
    c
}

/// Landmark derivative `D^a(α,β) = Σ_b C^{ab}(α) β_b`: the flat-connection
/// derivative of `β♯` along `α♯`.
pub fn landmark_derivative(
    landmarks: &Landmarks,
    kernel: &impl RadialKernel,
    alpha: &Covector,
    beta: &Covector,
) -> DMatrix<f64> {
    compression(landmarks, kernel, alpha) * &beta.0
}

/// The geometric quantities the curvature terms are built from, bundled.
pub struct GeometricAux {
    /// `F_a(α,β)`, N×D, symmetric in the covector pair.
    pub force: DMatrix<f64>,
    /// `S^{ab}(α)`, N×N×D, antisymmetric in `(a,b)`.
    pub strain: Array3<f64>,
    /// `C^{ab}(α)`, N×N, symmetric with zero diagonal.
    pub compression: DMatrix<f64>,
    /// `D^a(α,β)`, N×D.
    pub lderiv: DMatrix<f64>,
}

pub fn geometric_aux(
    landmarks: &Landmarks,
    kernel: &impl RadialKernel,
    alpha: &Covector,
    beta: &Covector,
) -> GeometricAux {
    let compression_alpha = compression(landmarks, kernel, alpha);
    let lderiv = &compression_alpha * &beta.0;
    GeometricAux {
        force: mixed_force(landmarks, kernel, alpha, beta),
        strain: strain(landmarks, kernel, alpha),
        compression: compression_alpha,
        lderiv,
    }
}

/// The strain term of the numerator through the raw kernel Hessian. Slower
/// than the rotationally invariant route used by [`curvature_terms`]; kept
/// as a cross-check.
pub fn r1_via_hessian(
    landmarks: &Landmarks,
    kernel: &impl RadialKernel,
    alpha: &Covector,
    beta: &Covector,
) -> f64 {
    let n = landmarks.count();
    let va = manifold::sharp(landmarks, kernel, alpha).0;
    let vb = manifold::sharp(landmarks, kernel, beta).0;
    let mut r1 = 0.0;
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let hess = hess_k(kernel, &landmarks.offset(a, b));
            let s_alpha = (va.row(a) - va.row(b)).transpose();
            let s_beta = (vb.row(a) - vb.row(b)).transpose();
            let hb = &hess * &s_beta;
            let ha = &hess * &s_alpha;
            r1 += 0.5
                * (alpha.0.row(a).dot(&alpha.0.row(b)) * s_beta.dot(&hb)
                    - alpha.0.row(a).dot(&beta.0.row(b)) * s_beta.dot(&ha)
                    - beta.0.row(a).dot(&alpha.0.row(b)) * s_alpha.dot(&hb)
                    + beta.0.row(a).dot(&beta.0.row(b)) * s_alpha.dot(&ha));
        }
    }
    r1
}

fn check_covector_shape(landmarks: &Landmarks, v: &Covector, what: &str) -> Result<()> {
    if v.0.nrows() != landmarks.count() || v.0.ncols() != landmarks.dim() {
        return Err(crate::error::Error::Shape(format!(
            "{what} must be {}x{}, got {}x{}",
            landmarks.count(),
            landmarks.dim(),
            v.0.nrows(),
            v.0.ncols()
        )));
    }
    Ok(())
}

/// Numerator terms and denominator for an arbitrary pair of covectors.
pub fn curvature_terms(
    landmarks: &Landmarks,
    kernel: &impl RadialKernel,
    alpha: &Covector,
    beta: &Covector,
) -> Result<CurvatureReport> {
    check_covector_shape(landmarks, alpha, "alpha")?;
    check_covector_shape(landmarks, beta, "beta")?;
    let n = landmarks.count();
    let va = manifold::sharp(landmarks, kernel, alpha).0;
    let vb = manifold::sharp(landmarks, kernel, beta).0;

    // R₁, rotationally invariant form: split the strain into parts parallel
    // and perpendicular to q^a - q^b weighted by (γ'', γ'/ρ).
    let mut r1 = 0.0;
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let offset = landmarks.offset(a, b);
            let rho = offset.norm();
            let unit = &offset / rho;
            let s_alpha = (va.row(a) - va.row(b)).transpose();
            let s_beta = (vb.row(a) - vb.row(b)).transpose();
            let sa_par = s_alpha.dot(&unit);
            let sb_par = s_beta.dot(&unit);
            let sa_perp = &s_alpha - &unit * sa_par;
            let sb_perp = &s_beta - &unit * sb_par;

            let ddg = kernel.ddgamma(rho);
            let dg_over_rho = kernel.dgamma(rho) / rho;

            // ⟨S∥(α)β_a - S∥(β)α_a, S∥(α)β_b - S∥(β)α_b⟩
            let left_a = beta.0.row(a).transpose() * sa_par - alpha.0.row(a).transpose() * sb_par;
            let left_b = beta.0.row(b).transpose() * sa_par - alpha.0.row(b).transpose() * sb_par;
            r1 += 0.5 * ddg * left_a.dot(&left_b);

            // perpendicular part through the tensor-product inner product
            let perp = sa_perp.dot(&sa_perp) * beta.0.row(a).dot(&beta.0.row(b))
                - sa_perp.dot(&sb_perp) * beta.0.row(a).dot(&alpha.0.row(b))
                - sb_perp.dot(&sa_perp) * alpha.0.row(a).dot(&beta.0.row(b))
                + sb_perp.dot(&sb_perp) * alpha.0.row(a).dot(&alpha.0.row(b));
            r1 += 0.5 * dg_over_rho * perp;
        }
    }

    // R₂ from landmark derivatives against forces
    let f_ab = mixed_force(landmarks, kernel, alpha, beta);
    let f_aa = mixed_force(landmarks, kernel, alpha, alpha);
    let f_bb = mixed_force(landmarks, kernel, beta, beta);
    let c_alpha = compression(landmarks, kernel, alpha);
    let c_beta = compression(landmarks, kernel, beta);
    let d_aa = &c_alpha * &alpha.0;
    let d_bb = &c_beta * &beta.0;
    let d_ab = &c_alpha * &beta.0;
    let d_ba = &c_beta * &alpha.0;

    let mut r2 = 0.0;
    for a in 0..n {
        r2 += d_aa.row(a).dot(&f_bb.row(a)) + d_bb.row(a).dot(&f_aa.row(a))
            - (d_ab.row(a) + d_ba.row(a)).dot(&f_ab.row(a));
    }

    // R₃ = Σ_{ac} K^{ac} (⟨F_a(α,β),F_c(α,β)⟩ - ⟨F_a(α,α),F_c(β,β)⟩)
    let mut r3 = 0.0;
    for a in 0..n {
        for c in 0..n {
            let g = if a == c {
                kernel.gamma0()
            } else {
                kernel.gamma(landmarks.separation(a, c))
            };
            r3 += g * (f_ab.row(a).dot(&f_ab.row(c)) - f_aa.row(a).dot(&f_bb.row(c)));
        }
    }

    // R₄ = -¾ ‖D(α,β) - D(β,α)‖²_{K^{-1}}, via a Gram solve
    let h = &d_ab - &d_ba;
    let gram = manifold::gram(landmarks, kernel, Smoothing::Exact)?;
    let chol = gram
        .cholesky()
        .ok_or_else(|| crate::error::Error::Degenerate("Gram Cholesky failed".into()))?;
    let y = chol.solve(&h);
    let r4 = -0.75 * h.zip_fold(&y, 0.0, |acc, p, q| acc + p * q);

    let pair_aa = manifold::cometric_pair(landmarks, kernel, alpha, alpha);
    let pair_bb = manifold::cometric_pair(landmarks, kernel, beta, beta);
    let pair_ab = manifold::cometric_pair(landmarks, kernel, alpha, beta);
    let den = pair_aa * pair_bb - pair_ab * pair_ab;

    Ok(CurvatureReport::new(
        r1,
        r2,
        r3,
        r4,
        den,
        alpha.0.norm_squared() * beta.0.norm_squared(),
    ))
}

/// Curvature when both covectors are supported at landmark 1 only: the
/// first three terms vanish identically and the numerator is never
/// positive. `alpha1`, `beta1` are the momenta carried by landmark 1.
pub fn one_momentum_curvature(
    landmarks: &Landmarks,
    kernel: &impl RadialKernel,
    alpha1: &DVector<f64>,
    beta1: &DVector<f64>,
) -> Result<CurvatureReport> {
    let (n, d) = (landmarks.count(), landmarks.dim());
    if n < 2 {
        return Err(crate::error::Error::Shape(
            "one-momentum curvature needs at least two landmarks".into(),
        ));
    }
    let g0 = kernel.gamma0();

    let r4 = if n == 2 {
        // closed form on two landmarks
        let rho = landmarks.separation(0, 1);
        let g = kernel.gamma(rho);
        let dg = kernel.dgamma(rho);
        let unit = landmarks.offset(0, 1) / rho;
        let a_par = alpha1.dot(&unit);
        let b_par = beta1.dot(&unit);
        let a_perp = alpha1 - &unit * a_par;
        let b_perp = beta1 - &unit * b_par;
        let cross = &a_perp * b_par - &b_perp * a_par;
        -0.75 * g0 * ((g0 - g) / (g0 + g)) * dg * dg * cross.norm_squared()
    } else {
        // H^a = (γ_{a1} - γ₀)(⟨α₁,∇K^{a1}⟩ β₁ - ⟨β₁,∇K^{a1}⟩ α₁), a > 1
        let mut h = DMatrix::zeros(n, d);
        for a in 1..n {
            let offset = landmarks.offset(a, 0);
            let grad = grad_k(kernel, &offset);
            let coeff = kernel.gamma(offset.norm()) - g0;
            let ha = (beta1 * grad.dot(alpha1) - alpha1 * grad.dot(beta1)) * coeff;
            for i in 0..d {
                h[(a, i)] = ha[i];
            }
        }
        let gram = manifold::gram(landmarks, kernel, Smoothing::Exact)?;
        let chol = gram
            .cholesky()
            .ok_or_else(|| crate::error::Error::Degenerate("Gram Cholesky failed".into()))?;
        let y = chol.solve(&h);
        -0.75 * h.zip_fold(&y, 0.0, |acc, p, q| acc + p * q)
    };

    // denominator: only the (1,1) kernel entry survives
    let den = g0 * g0 * (alpha1.norm_squared() * beta1.norm_squared() - alpha1.dot(beta1).powi(2));

    Ok(CurvatureReport::new(
        0.0,
        0.0,
        0.0,
        r4,
        den,
        alpha1.norm_squared() * beta1.norm_squared(),
    ))
}
