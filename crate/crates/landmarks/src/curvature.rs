//! Sectional curvature of a manifold presented by its cometric.
//!
//! Two independent routes to the same number:
//!
//! * [`cometric_report`] contracts the cometric, its first/second partials and
//!   one metric factor against the antisymmetric covector tensor
//!   `W_{ur} = α_u β_r - β_u α_r`. Only the `R₄` term touches the metric,
//!   and it never needs metric derivatives.
//! * [`classical_numerator`] reconstructs metric partials from cometric
//!   partials (`∂g = -g ∂Q g` for `g = Q⁻¹`), forms Christoffel symbols and
//!   the curvature tensor, and contracts with the sharped vectors.
//!
//! The two share nothing but the model's partial suppliers, which makes the
//! classical route a genuine oracle for the fast one.

use nalgebra::{DMatrix, DVector};
use ndarray::Array4;
use serde::Serialize;

use crate::cometric::Cometric;
use crate::error::{Error, Result};

/// Relative floor below which a denominator is treated as zero and the
/// sectional value is reported as undefined.
pub const DENOMINATOR_FLOOR: f64 = 1e-14;

/// The four numerator terms, their sum, the denominator, and the sectional
/// value (absent for degenerate sections).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CurvatureReport {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub sectional: Option<f64>,
}

impl CurvatureReport {
    /// Assemble a report; `section_scale` is the Euclidean `‖α‖²‖β‖²` used
    /// to decide whether the denominator is effectively zero.
    pub fn new(r1: f64, r2: f64, r3: f64, r4: f64, denominator: f64, section_scale: f64) -> Self {
        let numerator = r1 + r2 + r3 + r4;
        let sectional = if denominator > DENOMINATOR_FLOOR * section_scale {
            Some(numerator / denominator)
        } else {
            None
        };
        CurvatureReport {
            r1,
            r2,
            r3,
            r4,
            numerator,
            denominator,
            sectional,
        }
    }
}

fn squared_norm(v: &DVector<f64>) -> f64 {
    v.dot(v)
}

fn check_covector(n: usize, v: &DVector<f64>, what: &str) -> Result<()> {
    if v.len() != n {
        return Err(Error::Shape(format!(
            "{what} must have length {n}, got {}",
            v.len()
        )));
    }
    Ok(())
}

fn metric_from(co: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    co.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Degenerate("cometric not positive definite at this point".into()))
}

/// Contracted first partials `g^{ij,k} = Σ_ξ ∂_ξ g^{ij} · g^{ξk}`.
fn contract_d1(d1: &ndarray::Array3<f64>, co: &DMatrix<f64>, n: usize) -> ndarray::Array3<f64> {
    let mut c1 = ndarray::Array3::zeros((n, n, n));
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for xi in 0..n {
                    acc += d1[[i, j, xi]] * co[(xi, k)];
                }
                c1[[i, j, k]] = acc;
            }
        }
    }
    c1
}

/// Contracted second partials `g^{ij,kl} = Σ_{ξη} ∂²_{ξη} g^{ij} g^{ξk} g^{ηl}`.
fn contract_d2(d2: &Array4<f64>, co: &DMatrix<f64>, n: usize) -> Array4<f64> {
    // stage over the first derivative index, then the second
    let mut half = Array4::zeros((n, n, n, n));
    for i in 0..n {
        for j in 0..n {
            for eta in 0..n {
                for k in 0..n {
                    let mut acc = 0.0;
                    for xi in 0..n {
                        acc += d2[[i, j, xi, eta]] * co[(xi, k)];
                    }
                    half[[i, j, k, eta]] = acc;
                }
            }
        }
    }
    let mut c2 = Array4::zeros((n, n, n, n));
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut acc = 0.0;
                    for eta in 0..n {
                        acc += half[[i, j, k, eta]] * co[(eta, l)];
                    }
                    c2[[i, j, k, l]] = acc;
                }
            }
        }
    }
    c2
}

/// Numerator of sectional curvature straight from the cometric, split into
/// its four terms, together with the cometric-side denominator.
pub fn cometric_report<M: Cometric + ?Sized>(
    model: &M,
    x: &[f64],
    alpha: &DVector<f64>,
    beta: &DVector<f64>,
) -> Result<CurvatureReport> {
    let n = model.dim();
    check_covector(n, alpha, "alpha")?;
    check_covector(n, beta, "beta")?;

    let co = model.co(x);
    let metric = metric_from(&co)?;
    let d1 = model.co_d1(x);
    let d2 = model.co_d2(x);
    let c1 = contract_d1(&d1, &co, n);
    let c2 = contract_d2(&d2, &co, n);

    // W_{ur} = α_u β_r - β_u α_r
    let w = alpha * beta.transpose() - beta * alpha.transpose();

    // R₁ = ½ W_{ur} g^{su,rv} W_{sv}
    let mut r1 = 0.0;
    for u in 0..n {
        for r in 0..n {
            let wur = w[(u, r)];
            if wur == 0.0 {
                continue;
            }
            for s in 0..n {
                for v in 0..n {
                    r1 += wur * c2[[s, u, r, v]] * w[(s, v)];
                }
            }
        }
    }
    r1 *= 0.5;

    // R₂ = ½ W_{ur} (∂_ρ g^{us}) g^{ρr,v} W_{sv}
    let mut r2 = 0.0;
    for rho in 0..n {
        for u in 0..n {
            for r in 0..n {
                let wur = w[(u, r)];
                if wur == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for s in 0..n {
                    for v in 0..n {
                        inner += d1[[u, s, rho]] * c1[[rho, r, v]] * w[(s, v)];
                    }
                }
                r2 += wur * inner;
            }
        }
    }
    r2 *= 0.5;

    // R₃ = -⅛ W_{ur} (∂_σ g^{us}) g^{rv,σ} W_{sv}
    let mut r3 = 0.0;
    for sigma in 0..n {
        for u in 0..n {
            for r in 0..n {
                let wur = w[(u, r)];
                if wur == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for s in 0..n {
                    for v in 0..n {
                        inner += d1[[u, s, sigma]] * c1[[r, v, sigma]] * w[(s, v)];
                    }
                }
                r3 += wur * inner;
            }
        }
    }
    r3 *= -0.125;

    // R₄ = -¾ (W·g^{λ·,·}) g_{λμ} (g^{μ·,·}·W): collapse W first, then one
    // metric contraction. Since the metric is positive definite this term
    // is always ≤ 0.
    let mut collapsed = DVector::zeros(n);
    for lam in 0..n {
        let mut acc = 0.0;
        for u in 0..n {
            for r in 0..n {
                acc += c1[[lam, u, r]] * w[(u, r)];
            }
        }
        collapsed[lam] = acc;
    }
    let r4 = -0.75 * collapsed.dot(&(&metric * &collapsed));

    let den = denominator_from(&co, alpha, beta);
    Ok(CurvatureReport::new(
        r1,
        r2,
        r3,
        r4,
        den,
        squared_norm(alpha) * squared_norm(beta),
    ))
}

/// The summed numerator from [`cometric_report`].
pub fn cometric_numerator<M: Cometric + ?Sized>(
    model: &M,
    x: &[f64],
    alpha: &DVector<f64>,
    beta: &DVector<f64>,
) -> Result<f64> {
    cometric_report(model, x, alpha, beta).map(|r| r.numerator)
}

/// Numerator via the Christoffel route: metric partials are reconstructed
/// from cometric partials, then `R_{ijkm}` is contracted with the sharped
/// vectors `X = α♯`, `Y = β♯`.
pub fn classical_numerator<M: Cometric + ?Sized>(
    model: &M,
    x: &[f64],
    alpha: &DVector<f64>,
    beta: &DVector<f64>,
) -> Result<f64> {
    let n = model.dim();
    check_covector(n, alpha, "alpha")?;
    check_covector(n, beta, "beta")?;

    let co = model.co(x);
    let metric = metric_from(&co)?;
    let d1 = model.co_d1(x);
    let d2 = model.co_d2(x);

    let big_x = &co * alpha;
    let big_y = &co * beta;

    // ∂_k Q as matrices, with g·∂_k Q staged once
    let dq: Vec<DMatrix<f64>> = (0..n)
        .map(|k| DMatrix::from_fn(n, n, |i, j| d1[[i, j, k]]))
        .collect();
    let gdq: Vec<DMatrix<f64>> = (0..n).map(|k| &metric * &dq[k]).collect();
    // ∂_k g = -g ∂_k Q g
    let dg: Vec<DMatrix<f64>> = (0..n).map(|k| -(&gdq[k] * &metric)).collect();
    // ∂_l ∂_k g = g (∂_l Q g ∂_k Q + ∂_k Q g ∂_l Q - ∂_l ∂_k Q) g, symmetric
    // in (k, l)
    let mut ddg: Vec<Vec<DMatrix<f64>>> = vec![vec![DMatrix::zeros(0, 0); n]; n];
    for k in 0..n {
        for l in k..n {
            let ddq = DMatrix::from_fn(n, n, |i, j| d2[[i, j, k, l]]);
            let inner = &gdq[l] * &gdq[k] + &gdq[k] * &gdq[l] - &metric * ddq;
            let value = inner * &metric;
            if l != k {
                ddg[l][k] = value.clone();
            }
            ddg[k][l] = value;
        }
    }

    // Γ^k_{ij} = ½ Q^{kℓ} (g_{iℓ,j} + g_{jℓ,i} - g_{ij,ℓ})
    let mut gamma = vec![DMatrix::zeros(n, n); n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += co[(k, l)] * (dg[j][(i, l)] + dg[i][(j, l)] - dg[l][(i, j)]);
                }
                gamma[k][(i, j)] = 0.5 * acc;
            }
        }
    }

    // Second-derivative part of 2R_{ijkm}, contracted with X, Y:
    //   g_{ik,jm} + g_{jm,ik} - g_{jk,im} - g_{im,jk}
    let mut second = 0.0;
    for a in 0..n {
        for b in 0..n {
            let m = &ddg[a][b]; // m[(i,j)] = g_{ij,ab}
            second += big_y[a] * big_x[b] * (big_x.dot(&(m * &big_y)));
            second += big_x[a] * big_y[b] * (big_y.dot(&(m * &big_x)));
            second -= big_x[a] * big_x[b] * (big_y.dot(&(m * &big_y)));
            second -= big_y[a] * big_y[b] * (big_x.dot(&(m * &big_x)));
        }
    }

    // Christoffel parts, contracted: u^α = Γ^α_{ik} X^i Y^k, w^α = Γ^α YY,
    // z^α = Γ^α XX.
    let mut u = DVector::zeros(n);
    let mut wv = DVector::zeros(n);
    let mut z = DVector::zeros(n);
    for a in 0..n {
        u[a] = big_x.dot(&(&gamma[a] * &big_y));
        wv[a] = big_y.dot(&(&gamma[a] * &big_y));
        z[a] = big_x.dot(&(&gamma[a] * &big_x));
    }
    let gamma_part = u.dot(&(&metric * &u)) - wv.dot(&(&metric * &z));

    Ok(0.5 * second + gamma_part)
}

fn denominator_from(co: &DMatrix<f64>, alpha: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let aa = alpha.dot(&(co * alpha));
    let bb = beta.dot(&(co * beta));
    let ab = alpha.dot(&(co * beta));
    aa * bb - ab * ab
}

/// Denominator `‖α♯‖²‖β♯‖² - ⟨α♯,β♯⟩²`, evaluated on the cometric side as
/// `α_u α_s β_r β_v (g^{us} g^{rv} - g^{uv} g^{sr})`.
pub fn denominator<M: Cometric + ?Sized>(
    model: &M,
    x: &[f64],
    alpha: &DVector<f64>,
    beta: &DVector<f64>,
) -> f64 {
    denominator_from(&model.co(x), alpha, beta)
}

/// Full dual curvature tensor `R^{ursv}` (cometric indices up). Quadratic
/// cost in memory; intended for cross-checks on small models.
pub fn dual_curvature_tensor<M: Cometric + ?Sized>(model: &M, x: &[f64]) -> Result<Array4<f64>> {
    let n = model.dim();
    let co = model.co(x);
    let metric = metric_from(&co)?;
    let d1 = model.co_d1(x);
    let d2 = model.co_d2(x);
    let c1 = contract_d1(&d1, &co, n);
    let c2 = contract_d2(&d2, &co, n);

    // dual Christoffels Γ_u^{rs} = -½ g_{uφ} (g^{sφ,r} + g^{rφ,s} - g^{rs,φ})
    let mut dual_gamma = ndarray::Array3::zeros((n, n, n));
    for u in 0..n {
        for r in 0..n {
            for s in 0..n {
                let mut acc = 0.0;
                for phi in 0..n {
                    acc += metric[(u, phi)] * (c1[[s, phi, r]] + c1[[r, phi, s]] - c1[[r, s, phi]]);
                }
                dual_gamma[[u, r, s]] = -0.5 * acc;
            }
        }
    }

    // T[a,b,c,d] = g^{aλ,b} g_{λμ} g^{μc,d}
    let mut e = ndarray::Array3::zeros((n, n, n));
    for a in 0..n {
        for b in 0..n {
            for mu in 0..n {
                let mut acc = 0.0;
                for lam in 0..n {
                    acc += c1[[a, lam, b]] * metric[(lam, mu)];
                }
                e[[a, b, mu]] = acc;
            }
        }
    }
    let t = |a: usize, b: usize, c: usize, d: usize| -> f64 {
        let mut acc = 0.0;
        for mu in 0..n {
            acc += e[[a, b, mu]] * c1[[mu, c, d]];
        }
        acc
    };

    let mut out = Array4::zeros((n, n, n, n));
    for u in 0..n {
        for r in 0..n {
            for s in 0..n {
                for v in 0..n {
                    let mut acc =
                        -c2[[u, s, r, v]] - c2[[r, v, u, s]] + c2[[r, s, u, v]] + c2[[u, v, r, s]];
                    let mut gg1 = 0.0;
                    let mut gg2 = 0.0;
                    for rho in 0..n {
                        for sig in 0..n {
                            gg1 +=
                                dual_gamma[[rho, r, v]] * co[(rho, sig)] * dual_gamma[[sig, u, s]];
                            gg2 +=
                                dual_gamma[[rho, r, s]] * co[(rho, sig)] * dual_gamma[[sig, u, v]];
                        }
                    }
                    acc += 2.0 * gg1 - 2.0 * gg2;
                    acc += t(r, u, v, s) - t(r, u, s, v) + t(u, r, s, v) - t(u, r, v, s);
                    acc += t(r, s, v, u) + t(u, v, s, r) - t(r, v, s, u) - t(u, s, v, r);
                    out[[u, r, s, v]] = 0.5 * acc;
                }
            }
        }
    }
    Ok(out)
}
