//! Admissible rotationally invariant scalar kernels and their derivatives.
//!
//! A kernel enters every formula in this crate only through the radial
//! profile `γ(ρ)` and its first two derivatives, so the whole crate is
//! generic over [`RadialKernel`]. The built-in [`Kernel`] families are all
//! positive definite on `R^D` for every `D`; the Matérn orders are
//! restricted to half-integers so the Bessel form collapses to a
//! polynomial-times-exponential that we can differentiate exactly.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radial profile `γ` of a rotationally invariant kernel `K(x) = γ(‖x‖)`.
///
/// Implementations must be twice continuously differentiable with
/// `γ'(0) = 0` for the spatial Hessian limit at the origin to be valid;
/// see [`MaternOrder::Half`] for the one supported exception.
pub trait RadialKernel {
    /// `γ(ρ)` for `ρ ≥ 0`.
    fn gamma(&self, rho: f64) -> f64;
    /// `γ'(ρ)`.
    fn dgamma(&self, rho: f64) -> f64;
    /// `γ''(ρ)`.
    fn ddgamma(&self, rho: f64) -> f64;
    /// The length constant of the kernel (σ or A).
    fn scale(&self) -> f64;
    /// `γ(0)`.
    fn gamma0(&self) -> f64 {
        self.gamma(0.0)
    }
}

/// Half-integer Matérn smoothness orders with closed-form profiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaternOrder {
    /// `ν = 1/2`, the exponential kernel. Positive definite but only C⁰
    /// at the origin (`γ'(0) ≠ 0`); kept for completeness, not suitable
    /// for curvature computations.
    #[serde(rename = "1/2")]
    Half,
    #[serde(rename = "3/2")]
    ThreeHalves,
    #[serde(rename = "5/2")]
    FiveHalves,
    #[serde(rename = "7/2")]
    SevenHalves,
}

impl MaternOrder {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "1/2" => Ok(MaternOrder::Half),
            "3/2" => Ok(MaternOrder::ThreeHalves),
            "5/2" => Ok(MaternOrder::FiveHalves),
            "7/2" => Ok(MaternOrder::SevenHalves),
            other => Err(Error::InvalidKernel(format!(
                "matern order must be one of 1/2, 3/2, 5/2, 7/2; got {other:?}"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            MaternOrder::Half => "1/2",
            MaternOrder::ThreeHalves => "3/2",
            MaternOrder::FiveHalves => "5/2",
            MaternOrder::SevenHalves => "7/2",
        }
    }
}

/// The supported kernel families, normalized so that `γ(0) = 1`.
///
/// Serialized form matches the CLI/JSON grammar:
/// `{"family":"gaussian","scale":1.0}` or
/// `{"family":"matern","scale":1.0,"order":"3/2"}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum Kernel {
    /// `γ(ρ) = exp(-ρ²/2σ²)`.
    Gaussian { scale: f64 },
    /// Half-integer Matérn, e.g. `ν = 3/2`: `γ(ρ) = (1 + ρ/A) exp(-ρ/A)`.
    Matern { scale: f64, order: MaternOrder },
    /// `γ(ρ) = 1/(1 + ρ²/A²)`.
    Cauchy { scale: f64 },
}

impl Kernel {
    pub fn gaussian(scale: f64) -> Result<Self> {
        let k = Kernel::Gaussian { scale };
        k.validate()?;
        Ok(k)
    }

    pub fn matern(scale: f64, order: MaternOrder) -> Result<Self> {
        let k = Kernel::Matern { scale, order };
        k.validate()?;
        Ok(k)
    }

    pub fn cauchy(scale: f64) -> Result<Self> {
        let k = Kernel::Cauchy { scale };
        k.validate()?;
        Ok(k)
    }

    /// Check the parameters; deserialized kernels must pass through here.
    pub fn validate(&self) -> Result<()> {
        let scale = match self {
            Kernel::Gaussian { scale }
            | Kernel::Matern { scale, .. }
            | Kernel::Cauchy { scale } => *scale,
        };
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidKernel(format!(
                "scale must be a positive finite number, got {scale}"
            )));
        }
        Ok(())
    }
}

impl RadialKernel for Kernel {
    fn gamma(&self, rho: f64) -> f64 {
        match *self {
            Kernel::Gaussian { scale } => {
                let s = rho / scale;
                (-0.5 * s * s).exp()
            }
            Kernel::Matern { scale, order } => {
                let z = rho / scale;
                let e = (-z).exp();
                match order {
                    MaternOrder::Half => e,
                    MaternOrder::ThreeHalves => (1.0 + z) * e,
                    MaternOrder::FiveHalves => (1.0 + z + z * z / 3.0) * e,
                    MaternOrder::SevenHalves => (1.0 + z + 0.4 * z * z + z * z * z / 15.0) * e,
                }
            }
            Kernel::Cauchy { scale } => {
                let s = rho / scale;
                1.0 / (1.0 + s * s)
            }
        }
    }

    fn dgamma(&self, rho: f64) -> f64 {
        match *self {
            Kernel::Gaussian { scale } => {
                let s = rho / scale;
                -(rho / (scale * scale)) * (-0.5 * s * s).exp()
            }
            Kernel::Matern { scale, order } => {
                let z = rho / scale;
                let e = (-z).exp();
                match order {
                    MaternOrder::Half => -e / scale,
                    MaternOrder::ThreeHalves => -z * e / scale,
                    MaternOrder::FiveHalves => -(z * (1.0 + z) / 3.0) * e / scale,
                    MaternOrder::SevenHalves => -(z * (3.0 + 3.0 * z + z * z) / 15.0) * e / scale,
                }
            }
            Kernel::Cauchy { scale } => {
                let s = rho / scale;
                let d = 1.0 + s * s;
                -2.0 * s / (scale * d * d)
            }
        }
    }

    fn ddgamma(&self, rho: f64) -> f64 {
        match *self {
            Kernel::Gaussian { scale } => {
                let s = rho / scale;
                let a2 = scale * scale;
                (rho * rho / (a2 * a2) - 1.0 / a2) * (-0.5 * s * s).exp()
            }
            Kernel::Matern { scale, order } => {
                let z = rho / scale;
                let e = (-z).exp();
                let a2 = scale * scale;
                match order {
                    MaternOrder::Half => e / a2,
                    MaternOrder::ThreeHalves => (z - 1.0) * e / a2,
                    MaternOrder::FiveHalves => -((1.0 + z - z * z) / 3.0) * e / a2,
                    MaternOrder::SevenHalves => -((3.0 + 3.0 * z - z * z * z) / 15.0) * e / a2,
                }
            }
            Kernel::Cauchy { scale } => {
                let s = rho / scale;
                let d = 1.0 + s * s;
                2.0 * (3.0 * s * s - 1.0) / (scale * scale * d * d * d)
            }
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            Kernel::Gaussian { scale }
            | Kernel::Matern { scale, .. }
            | Kernel::Cauchy { scale } => scale,
        }
    }
}

/// `(γ(ρ), γ'(ρ), γ''(ρ))` in one call.
pub fn gamma_derivs(kernel: &impl RadialKernel, rho: f64) -> (f64, f64, f64) {
    (kernel.gamma(rho), kernel.dgamma(rho), kernel.ddgamma(rho))
}

/// Spatial gradient `∇K(x) = γ'(‖x‖) x/‖x‖`; zero at the origin.
pub fn grad_k(kernel: &impl RadialKernel, x: &DVector<f64>) -> DVector<f64> {
    let rho = x.norm();
    if rho == 0.0 {
        return DVector::zeros(x.len());
    }
    x * (kernel.dgamma(rho) / rho)
}

/// Spatial Hessian `D²K(x) = γ'' xxᵀ/‖x‖² + (γ'/‖x‖) Pr⊥(x)`.
///
/// At the origin this returns the continuous limit `γ''(0) I`.
pub fn hess_k(kernel: &impl RadialKernel, x: &DVector<f64>) -> DMatrix<f64> {
    let d = x.len();
    let rho = x.norm();
    if rho == 0.0 {
        return DMatrix::identity(d, d) * kernel.ddgamma(0.0);
    }
    let unit = x / rho;
    let radial = &unit * unit.transpose();
    let tangential = DMatrix::identity(d, d) - &radial;
    radial * kernel.ddgamma(rho) + tangential * (kernel.dgamma(rho) / rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EXP_HALF: f64 = 0.6065306597126334; // e^{-1/2}

    fn all_kernels() -> Vec<Kernel> {
        vec![
            Kernel::gaussian(1.0).unwrap(),
            Kernel::gaussian(0.7).unwrap(),
            Kernel::matern(1.0, MaternOrder::ThreeHalves).unwrap(),
            Kernel::matern(1.3, MaternOrder::FiveHalves).unwrap(),
            Kernel::matern(0.9, MaternOrder::SevenHalves).unwrap(),
            Kernel::cauchy(1.0).unwrap(),
        ]
    }

    #[test]
    fn gaussian_values_at_origin_and_one() {
        let k = Kernel::gaussian(1.0).unwrap();
        let (g, dg, ddg) = gamma_derivs(&k, 0.0);
        assert_eq!(g, 1.0);
        assert_eq!(dg, 0.0);
        assert_eq!(ddg, -1.0);

        let (g, dg, ddg) = gamma_derivs(&k, 1.0);
        assert!((g - EXP_HALF).abs() < 1e-15);
        assert!((dg + EXP_HALF).abs() < 1e-15);
        assert!(ddg.abs() < 1e-15); // γ'' = (ρ²-1) e^{-ρ²/2} vanishes at ρ = 1
    }

    #[test]
    fn matern_slope_zero_at_origin() {
        for order in [
            MaternOrder::ThreeHalves,
            MaternOrder::FiveHalves,
            MaternOrder::SevenHalves,
        ] {
            let k = Kernel::matern(1.0, order).unwrap();
            assert_eq!(k.dgamma(0.0), 0.0, "order {:?}", order);
            assert_eq!(k.gamma(0.0), 1.0);
        }
        // The exponential kernel is the supported exception.
        let k = Kernel::matern(2.0, MaternOrder::Half).unwrap();
        assert!((k.dgamma(0.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Kernel::gaussian(0.0).is_err());
        assert!(Kernel::gaussian(-1.0).is_err());
        assert!(Kernel::cauchy(f64::NAN).is_err());
        assert!(MaternOrder::parse("2").is_err());
        assert!(MaternOrder::parse("5/2").is_ok());
    }

    #[test]
    fn kernel_json_grammar_round_trip() {
        let k: Kernel = serde_json::from_str(r#"{"family":"gaussian","scale":1.0}"#).unwrap();
        assert_eq!(k, Kernel::Gaussian { scale: 1.0 });
        let k: Kernel =
            serde_json::from_str(r#"{"family":"matern","scale":1.0,"order":"3/2"}"#).unwrap();
        assert_eq!(
            k,
            Kernel::Matern {
                scale: 1.0,
                order: MaternOrder::ThreeHalves
            }
        );
        // unknown fields and unknown orders rejected
        assert!(
            serde_json::from_str::<Kernel>(r#"{"family":"gaussian","scale":1,"x":2}"#).is_err()
        );
        assert!(
            serde_json::from_str::<Kernel>(r#"{"family":"matern","scale":1,"order":"2"}"#).is_err()
        );
        let s = serde_json::to_string(&Kernel::cauchy(2.0).unwrap()).unwrap();
        assert_eq!(s, r#"{"family":"cauchy","scale":2.0}"#);
    }

    #[test]
    fn radial_derivatives_match_finite_differences() {
        let h = 1e-5;
        for k in all_kernels() {
            for &rho in &[0.3, 0.75, 1.0, 1.8, 3.2] {
                let fd1 = (k.gamma(rho + h) - k.gamma(rho - h)) / (2.0 * h);
                let fd2 = (k.gamma(rho + h) - 2.0 * k.gamma(rho) + k.gamma(rho - h)) / (h * h);
                assert!((fd1 - k.dgamma(rho)).abs() < 1e-8, "{k:?} rho={rho}");
                assert!((fd2 - k.ddgamma(rho)).abs() < 1e-5, "{k:?} rho={rho}");
            }
        }
    }

    #[test]
    fn gradient_at_origin_and_axis_point() {
        let k = Kernel::gaussian(1.0).unwrap();
        let zero = grad_k(&k, &DVector::from_vec(vec![0.0, 0.0]));
        assert_eq!(zero, DVector::from_vec(vec![0.0, 0.0]));

        let g = grad_k(&k, &DVector::from_vec(vec![1.0, 0.0]));
        assert!((g[0] + EXP_HALF).abs() < 1e-15);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn hessian_at_origin_and_axis_point() {
        let k = Kernel::gaussian(1.0).unwrap();
        let h0 = hess_k(&k, &DVector::from_vec(vec![0.0, 0.0]));
        assert_eq!(h0, DMatrix::identity(2, 2) * -1.0);

        let h = hess_k(&k, &DVector::from_vec(vec![1.0, 0.0]));
        assert!(h[(0, 0)].abs() < 1e-15); // γ''(1) = 0
        assert!((h[(1, 1)] + EXP_HALF).abs() < 1e-15); // γ'(1)/1
        assert!(h[(0, 1)].abs() < 1e-15 && h[(1, 0)].abs() < 1e-15);
    }

    #[test]
    fn spatial_gradient_matches_finite_differences() {
        // central differences of γ(‖x‖) in each coordinate, h = 1e-5
        let h = 1e-5;
        for k in all_kernels() {
            let x = DVector::from_vec(vec![0.4, -0.9, 0.25]);
            let g = grad_k(&k, &x);
            for i in 0..3 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (k.gamma(xp.norm()) - k.gamma(xm.norm())) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-7, "{k:?} coord {i}");
            }
        }
    }

    #[test]
    fn spatial_hessian_matches_gradient_differences() {
        let h = 1e-5;
        for k in all_kernels() {
            let x = DVector::from_vec(vec![-0.6, 0.3, 0.8]);
            let hess = hess_k(&k, &x);
            for i in 0..3 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (grad_k(&k, &xp) - grad_k(&k, &xm)) / (2.0 * h);
                for j in 0..3 {
                    assert!((fd[j] - hess[(i, j)]).abs() < 1e-5, "{k:?} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn gram_matrices_positive_definite_on_random_sets() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for k in all_kernels() {
            let min_sep = 0.1 * k.scale();
            for _ in 0..20 {
                let n = rng.random_range(2..=6usize);
                let d = rng.random_range(1..=3usize);
                let mut pts: Vec<DVector<f64>> = Vec::new();
                while pts.len() < n {
                    let cand = DVector::from_fn(d, |_, _| rng.random_range(-2.0..2.0));
                    if pts.iter().all(|p| (p - &cand).norm() >= min_sep) {
                        pts.push(cand);
                    }
                }
                let mut gram = DMatrix::zeros(n, n);
                for a in 0..n {
                    for b in 0..n {
                        gram[(a, b)] = k.gamma((&pts[a] - &pts[b]).norm());
                    }
                }
                let eigs = gram.symmetric_eigen().eigenvalues;
                let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
                assert!(min_eig > 0.0, "{k:?}: min eigenvalue {min_eig}");
            }
        }
    }

    proptest! {
        #[test]
        fn gamma_bounded_by_gamma0(rho in 0.0f64..20.0) {
            for k in all_kernels() {
                prop_assert!(k.gamma(rho).abs() <= k.gamma0() + 1e-15);
            }
        }

        #[test]
        fn gradient_antisymmetry(x0 in -3.0f64..3.0, x1 in -3.0f64..3.0) {
            let k = Kernel::gaussian(1.0).unwrap();
            let x = DVector::from_vec(vec![x0, x1]);
            let g_pos = grad_k(&k, &x);
            let g_neg = grad_k(&k, &(-&x));
            prop_assert!((g_pos + g_neg).norm() == 0.0);
        }

        #[test]
        fn hessian_symmetry(x0 in -3.0f64..3.0, x1 in -3.0f64..3.0, x2 in -3.0f64..3.0) {
            for k in all_kernels() {
                let x = DVector::from_vec(vec![x0, x1, x2]);
                let h = hess_k(&k, &x);
                prop_assert!((&h - h.transpose()).norm() < 1e-14);
            }
        }
    }
}
