//! Geodesics and curvature with momentum on two landmarks only.
//!
//! In mean/semi-difference variables `q̄, δq, p̄, δp` the cogeodesic flow
//! reduces to conserved data (energy `H`, linear momentum `p̄`, angular
//! momentum magnitude `ω`) plus a one-dimensional radial motion governed by
//!
//! ```text
//!   ρ̇² = 4 F(ρ)/ρ²,
//!   F(x) = H x²(γ₀-γ(x)) - ‖p̄‖² x²(γ₀²-γ(x)²) - 4ω²(γ₀-γ(x))²
//! ```
//!
//! The radial solver integrates the equivalent smooth second-order form
//! `ρ̈ = 2F'(ρ)/ρ² - 4F(ρ)/ρ³`, which carries the motion through simple
//! turning points (where `ρ̇` changes sign) without meeting the square-root
//! singularity; double roots of `F` are detected and reported instead of
//! being integrated across.

use nalgebra::DVector;

use crate::curvature::CurvatureReport;
use crate::error::{Error, Result};
use crate::kernels::RadialKernel;
use crate::manifold::{Covector, Landmarks};

/// Two-point phase space in means and semi-differences.
#[derive(Clone, Debug)]
pub struct TwoPointState {
    pub qbar: DVector<f64>,
    pub dq: DVector<f64>,
    pub pbar: DVector<f64>,
    pub dp: DVector<f64>,
}

impl TwoPointState {
    /// Separation `ρ = 2‖δq‖`.
    pub fn rho(&self) -> f64 {
        2.0 * self.dq.norm()
    }
}

/// Means and semi-differences of positions and momenta.
pub fn to_mean_diff(
    q1: &DVector<f64>,
    q2: &DVector<f64>,
    p1: &DVector<f64>,
    p2: &DVector<f64>,
) -> Result<TwoPointState> {
    let dq = (q1 - q2) / 2.0;
    if dq.norm() == 0.0 {
        return Err(Error::Degenerate("coincident landmark pair".into()));
    }
    Ok(TwoPointState {
        qbar: (q1 + q2) / 2.0,
        dq,
        pbar: (p1 + p2) / 2.0,
        dp: (p1 - p2) / 2.0,
    })
}

/// Inverse of [`to_mean_diff`].
pub fn from_mean_diff(
    state: &TwoPointState,
) -> (DVector<f64>, DVector<f64>, DVector<f64>, DVector<f64>) {
    (
        &state.qbar + &state.dq,
        &state.qbar - &state.dq,
        &state.pbar + &state.dp,
        &state.pbar - &state.dp,
    )
}

/// The three conserved quantities of two-point geodesics.
#[derive(Clone, Debug)]
pub struct ConservedSet {
    /// Hamiltonian `H = (γ₀+γ(ρ))‖p̄‖² + (γ₀-γ(ρ))‖δp‖²`.
    pub energy: f64,
    /// Linear momentum `p̄`.
    pub pbar: DVector<f64>,
    /// Magnitude of the angular momentum 2-form `δq ∧ δp`.
    pub omega: f64,
}

pub fn conserved(state: &TwoPointState, kernel: &impl RadialKernel) -> ConservedSet {
    let rho = state.rho();
    let g0 = kernel.gamma0();
    let g = kernel.gamma(rho);
    let energy = (g0 + g) * state.pbar.norm_squared() + (g0 - g) * state.dp.norm_squared();
    let product = state.dp.norm_squared() * state.dq.norm_squared();
    let wedge_sq = product - state.dp.dot(&state.dq).powi(2);
    // parallel δp, δq cancel catastrophically; snap the leftover noise to
    // an exact zero so radial motion stays exactly radial
    let omega = if wedge_sq <= 1e-13 * product {
        0.0
    } else {
        wedge_sq.sqrt()
    };
    ConservedSet {
        energy,
        pbar: state.pbar.clone(),
        omega,
    }
}

/// Radicand of the radial equation.
pub fn radial_poly_f(kernel: &impl RadialKernel, cons: &ConservedSet, x: f64) -> f64 {
    let g0 = kernel.gamma0();
    let g = kernel.gamma(x);
    let gm = g0 - g;
    cons.energy * x * x * gm
        - cons.pbar.norm_squared() * x * x * (g0 * g0 - g * g)
        - 4.0 * cons.omega * cons.omega * gm * gm
}

/// Analytic derivative `F'(x)`.
pub fn radial_poly_f_prime(kernel: &impl RadialKernel, cons: &ConservedSet, x: f64) -> f64 {
    let g0 = kernel.gamma0();
    let g = kernel.gamma(x);
    let dg = kernel.dgamma(x);
    let gm = g0 - g;
    let p2 = cons.pbar.norm_squared();
    cons.energy * (2.0 * x * gm - x * x * dg)
        - p2 * (2.0 * x * (g0 * g0 - g * g) - 2.0 * x * x * g * dg)
        + 8.0 * cons.omega * cons.omega * gm * dg
}

/// Sampled reduction `(ρ(t), θ(t), q̄(t))` of a two-point geodesic, with
/// linear interpolation between samples.
#[derive(Clone, Debug)]
pub struct TwoPointSolution {
    pub times: Vec<f64>,
    pub rho: Vec<f64>,
    pub theta: Vec<f64>,
    pub qbar: Vec<DVector<f64>>,
    frame: (DVector<f64>, DVector<f64>),
}

impl TwoPointSolution {
    fn locate(&self, t: f64) -> (usize, f64) {
        let t_end = *self.times.last().unwrap();
        let t = t.clamp(0.0, t_end);
        let h = self.times[1] - self.times[0];
        let i = ((t / h) as usize).min(self.times.len() - 2);
        let w = (t - self.times[i]) / h;
        (i, w)
    }

    pub fn rho_at(&self, t: f64) -> f64 {
        let (i, w) = self.locate(t);
        self.rho[i] * (1.0 - w) + self.rho[i + 1] * w
    }

    pub fn theta_at(&self, t: f64) -> f64 {
        let (i, w) = self.locate(t);
        self.theta[i] * (1.0 - w) + self.theta[i + 1] * w
    }

    pub fn qbar_at(&self, t: f64) -> DVector<f64> {
        let (i, w) = self.locate(t);
        &self.qbar[i] * (1.0 - w) + &self.qbar[i + 1] * w
    }

    /// Reconstructed landmark positions `(q¹(t), q²(t))`.
    pub fn positions_at(&self, t: f64) -> (DVector<f64>, DVector<f64>) {
        let rho = self.rho_at(t);
        let theta = self.theta_at(t);
        let qbar = self.qbar_at(t);
        let dq = (&self.frame.0 * theta.cos() + &self.frame.1 * theta.sin()) * (0.5 * rho);
        (&qbar + &dq, &qbar - &dq)
    }
}

/// Tolerances used when deciding that radial motion sits on a double root.
const STALL_F_TOL: f64 = 1e-10;
const STALL_DF_TOL: f64 = 1e-8;

/// Natural size of `F` near `rho`, for relative comparisons.
fn radial_poly_scale(cons: &ConservedSet, rho: f64) -> f64 {
    1.0 + cons.energy.abs() * rho * rho
        + cons.pbar.norm_squared() * rho * rho
        + cons.omega * cons.omega
}

/// True when `(rho, rhodot)` sits on an *isolated* double root of `F`: the
/// radial quadrature is singular there and the continuation ambiguous. A
/// neighborhood where `F ≡ 0` (flat-kernel plateaus) is not isolated: the
/// separation simply stays constant and integration proceeds.
fn stalled_on_double_root(
    kernel: &impl RadialKernel,
    cons: &ConservedSet,
    rho: f64,
    rhodot: f64,
    rho_ref: f64,
) -> bool {
    let f_scale = radial_poly_scale(cons, rho_ref);
    if rho <= 0.01 * kernel.scale()
        || rhodot.abs() >= STALL_DF_TOL * (1.0 + rho_ref)
        || radial_poly_f(kernel, cons, rho).abs() >= STALL_F_TOL * f_scale
        || radial_poly_f_prime(kernel, cons, rho).abs() >= STALL_DF_TOL * f_scale
    {
        return false;
    }
    let probe = 1e-3 * rho;
    let lo = radial_poly_f(kernel, cons, rho - probe);
    let hi = radial_poly_f(kernel, cons, rho + probe);
    lo.abs() > STALL_F_TOL * f_scale || hi.abs() > STALL_F_TOL * f_scale
}

/// Solve the reduced two-point system over `[0, t_end]`.
///
/// The radial variable is integrated with RK4 and refined by step halving
/// until two consecutive refinements agree to `tol` in the sup norm; the
/// angle and mean quadratures ride along as extra state components, which
/// keeps them at the same fourth order.
pub fn solve_two_point(
    state0: &TwoPointState,
    kernel: &impl RadialKernel,
    t_end: f64,
    tol: f64,
) -> Result<TwoPointSolution> {
    if !t_end.is_finite() || t_end <= 0.0 {
        return Err(Error::Shape("t_end must be positive".into()));
    }
    let d = state0.qbar.len();
    let rho0 = state0.rho();
    if rho0 == 0.0 {
        return Err(Error::Degenerate("coincident landmark pair".into()));
    }
    let cons = conserved(state0, kernel);
    let g0 = kernel.gamma0();

    // moving frame spanning the δq plane: e1 along δq(0), e2 chosen so the
    // angular momentum is +ω e1∧e2 and θ increases
    let e1 = &state0.dq / state0.dq.norm();
    let perp = &state0.dp - &e1 * state0.dp.dot(&e1);
    let e2 = if cons.omega > 0.0 && perp.norm() > 0.0 {
        &perp / perp.norm()
    } else {
        DVector::zeros(d)
    };

    // ρ̇(0) from the exact identity rather than the square root
    let rhodot0 = 4.0 * (g0 - kernel.gamma(rho0)) * state0.dp.dot(&state0.dq) / rho0;

    if stalled_on_double_root(kernel, &cons, rho0, rhodot0, rho0) {
        return Err(Error::TurningPoint(format!(
            "double root of the radial polynomial at rho = {rho0:.6}"
        )));
    }

    // state y = [ρ, ρ̇, θ, q̄…]
    let rhs = |y: &DVector<f64>| -> DVector<f64> {
        let rho = y[0].max(f64::MIN_POSITIVE);
        let f = radial_poly_f(kernel, &cons, rho);
        let fp = radial_poly_f_prime(kernel, &cons, rho);
        let gm = g0 - kernel.gamma(rho);
        let mut dy = DVector::zeros(3 + d);
        dy[0] = y[1];
        dy[1] = 2.0 * fp / (rho * rho) - 4.0 * f / (rho * rho * rho);
        dy[2] = 4.0 * cons.omega * gm / (rho * rho);
        for i in 0..d {
            dy[3 + i] = (g0 + kernel.gamma(rho)) * cons.pbar[i];
        }
        dy
    };

    let run = |steps: usize| -> Result<Vec<DVector<f64>>> {
        let h = t_end / steps as f64;
        let mut y = DVector::zeros(3 + d);
        y[0] = rho0;
        y[1] = rhodot0;
        for i in 0..d {
            y[3 + i] = state0.qbar[i];
        }
        let mut out = Vec::with_capacity(steps + 1);
        out.push(y.clone());
        for _ in 0..steps {
            let k1 = rhs(&y);
            let k2 = rhs(&(&y + &k1 * (0.5 * h)));
            let k3 = rhs(&(&y + &k2 * (0.5 * h)));
            let k4 = rhs(&(&y + &k3 * h));
            y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            if y[0] <= 0.0 || y[0].is_nan() {
                return Err(Error::Quadrature(
                    "radial variable left the positive axis; step too coarse".into(),
                ));
            }
            out.push(y.clone());
        }
        Ok(out)
    };

    let mut steps = ((t_end / 1e-3).ceil() as usize).clamp(200, 400_000);
    let mut coarse = run(steps)?;
    for _ in 0..8 {
        let fine = run(steps * 2)?;
        let mut gap = 0.0f64;
        for (i, c) in coarse.iter().enumerate() {
            gap = gap.max((c[0] - fine[2 * i][0]).abs());
        }
        if gap <= tol {
            let samples = fine;
            let steps = steps * 2;
            let h = t_end / steps as f64;
            let mut sol = TwoPointSolution {
                times: (0..=steps).map(|i| i as f64 * h).collect(),
                rho: samples.iter().map(|y| y[0]).collect(),
                theta: samples.iter().map(|y| y[2]).collect(),
                qbar: samples
                    .iter()
                    .map(|y| DVector::from_fn(d, |i, _| y[3 + i]))
                    .collect(),
                frame: (e1.clone_owned(), e2.clone_owned()),
            };
            // θ(0) = 0 by the frame choice
            let theta0 = sol.theta[0];
            for v in &mut sol.theta {
                *v -= theta0;
            }
            return Ok(sol);
        }
        steps *= 2;
        coarse = fine;
    }
    Err(Error::Quadrature(format!(
        "radial refinement did not reach tol = {tol:e}"
    )))
}

/// Global fate of a two-point geodesic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrajectoryClass {
    /// The pair diverges at both time infinities.
    Scattering,
    /// The pair converges asymptotically as `t → +∞`.
    CaptureForward,
    /// The pair converges asymptotically as `t → -∞` (diverges forward).
    CaptureBackward,
}

impl TrajectoryClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrajectoryClass::Scattering => "scattering",
            TrajectoryClass::CaptureForward => "capture_forward",
            TrajectoryClass::CaptureBackward => "capture_backward",
        }
    }
}

/// Sign of `F` as `x → 0⁺`, from the quartic leading term.
fn limit_coefficient(kernel: &impl RadialKernel, cons: &ConservedSet) -> f64 {
    let c = -kernel.ddgamma(0.0) / 2.0;
    c * (cons.energy - 2.0 * kernel.gamma0() * cons.pbar.norm_squared())
        - 4.0 * c * c * cons.omega * cons.omega
}

fn bisect_root(kernel: &impl RadialKernel, cons: &ConservedSet, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = radial_poly_f(kernel, cons, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-12 * (1.0 + mid) {
            return mid;
        }
        let f_mid = radial_poly_f(kernel, cons, mid);
        if (f_lo <= 0.0) == (f_mid <= 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Roots of `F` on a log grid over `[1e-3·scale, 50·scale]`.
fn radial_roots(kernel: &impl RadialKernel, cons: &ConservedSet) -> Vec<f64> {
    let lo = 1e-3 * kernel.scale();
    let hi = 50.0 * kernel.scale();
    let count = 2000;
    let ratio = (hi / lo).ln() / (count - 1) as f64;
    let mut roots = Vec::new();
    let mut prev_x = lo;
    let mut prev_f = radial_poly_f(kernel, cons, lo);
    for i in 1..count {
        let x = lo * ((i as f64) * ratio).exp();
        let f = radial_poly_f(kernel, cons, x);
        if prev_f == 0.0 {
            roots.push(prev_x);
        } else if (prev_f < 0.0) != (f < 0.0) {
            roots.push(bisect_root(kernel, cons, prev_x, x));
        }
        prev_x = x;
        prev_f = f;
    }
    roots
}

/// Classify by root analysis of `F`: no turning point outward means the
/// pair escapes; `F > 0` all the way down to zero separation means the
/// pair converges asymptotically in that time direction.
pub fn classify(state0: &TwoPointState, kernel: &impl RadialKernel) -> Result<TrajectoryClass> {
    let cons = conserved(state0, kernel);
    let rho0 = state0.rho();
    if rho0 == 0.0 {
        return Err(Error::Degenerate("coincident landmark pair".into()));
    }
    let radial = state0.dp.dot(&state0.dq);
    let f_scale = radial_poly_scale(&cons, rho0);

    // direction of radial motion now (or where F pushes if at a root)
    let outward = if radial.abs() > 1e-13 * (1.0 + state0.dp.norm() * state0.dq.norm()) {
        radial > 0.0
    } else {
        let fp = radial_poly_f_prime(kernel, &cons, rho0);
        if fp.abs() <= STALL_DF_TOL * f_scale {
            if stalled_on_double_root(kernel, &cons, rho0, 0.0, rho0) {
                return Err(Error::TurningPoint(format!(
                    "radial motion stalls on a double root at rho = {rho0:.6}"
                )));
            }
            // F vanishes identically around ρ₀: the separation is stationary
            return Err(Error::Inconclusive(
                "separation is stationary; trajectory is neither scattering nor capture".into(),
            ));
        }
        fp > 0.0
    };

    let roots = radial_roots(kernel, &cons);
    let eps = 1e-9 * (1.0 + rho0);
    let root_above = roots.iter().any(|&r| r > rho0 + eps);
    let root_below = roots.iter().any(|&r| r < rho0 - eps);

    // inward fate: capture needs F > 0 all the way down to zero separation,
    // including below the scan grid where the quartic limit term decides
    let coeff0 = limit_coefficient(kernel, &cons);
    let capture_inward = if root_below {
        false
    } else if coeff0 != 0.0 {
        coeff0 > 0.0
    } else {
        return Err(Error::Inconclusive(
            "limit coefficient of F at zero separation is degenerate".into(),
        ));
    };

    match (outward, root_above, capture_inward) {
        // moving out, turning point above, falls back in and converges
        (true, true, true) => Ok(TrajectoryClass::CaptureForward),
        // moving out, turning point above, bounces below too: bounded orbit
        (true, true, false) => Err(Error::Inconclusive(
            "radial motion bounded between turning points".into(),
        )),
        // escapes forward; converged in the backward direction
        (true, false, true) => Ok(TrajectoryClass::CaptureBackward),
        // escapes forward, bounced in the past: diverges both ways
        (true, false, false) => Ok(TrajectoryClass::Scattering),
        // moving in and converging
        (false, _, true) => Ok(TrajectoryClass::CaptureForward),
        // moving in, bounces below, then escapes outward
        (false, false, false) => Ok(TrajectoryClass::Scattering),
        // moving in, bounces below, blocked above: bounded orbit
        (false, true, false) => Err(Error::Inconclusive(
            "radial motion bounded between turning points".into(),
        )),
    }
}

/// The five orthogonal pieces of `‖α ∧ β‖²` for two-point covectors.
#[derive(Clone, Copy, Debug)]
pub struct TDecomposition {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub t5: f64,
}

/// Decompose a pair of two-point covectors along the unit separation
/// direction `u = (q¹-q²)/ρ`.
pub fn t_decomposition(
    u: &DVector<f64>,
    alpha: (&DVector<f64>, &DVector<f64>),
    beta: (&DVector<f64>, &DVector<f64>),
) -> TDecomposition {
    let da = (alpha.0 - alpha.1) / 2.0;
    let abar = (alpha.0 + alpha.1) / 2.0;
    let db = (beta.0 - beta.1) / 2.0;
    let bbar = (beta.0 + beta.1) / 2.0;

    let da_par = da.dot(u);
    let db_par = db.dot(u);
    let da_perp = &da - u * da_par;
    let db_perp = &db - u * db_par;

    let t1 = (&abar * db_par - &bbar * da_par).norm_squared();
    let t2 = db_perp.norm_squared() * abar.norm_squared()
        - 2.0 * db_perp.dot(&da_perp) * abar.dot(&bbar)
        + da_perp.norm_squared() * bbar.norm_squared();
    let t3 = (&da_perp * db_par - &db_perp * da_par).norm_squared();
    let t4 =
        2.0 * (da_perp.norm_squared() * db_perp.norm_squared() - da_perp.dot(&db_perp).powi(2));
    let t5 = 2.0 * (abar.norm_squared() * bbar.norm_squared() - abar.dot(&bbar).powi(2));
    TDecomposition { t1, t2, t3, t4, t5 }
}

/// The kernel-dependent coefficients of the two-point curvature formula.
#[derive(Clone, Copy, Debug)]
pub struct KCoefficients {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
}

pub fn k_coefficients(kernel: &impl RadialKernel, rho: f64) -> KCoefficients {
    let g0 = kernel.gamma0();
    let g = kernel.gamma(rho);
    let dg = kernel.dgamma(rho);
    let ddg = kernel.ddgamma(rho);
    let gm = g0 - g;
    KCoefficients {
        k1: gm * gm * ddg,
        k2: gm * gm * dg / rho,
        k3: gm * dg * dg,
        k4: gm * gm * dg * dg / (g0 + g),
    }
}

/// Coefficients of `T₁…T₅` in the summed two-point numerator.
pub fn t_coefficients(k: &KCoefficients) -> [f64; 5] {
    [
        2.0 * (2.0 * k.k1 - k.k3 - 3.0 * k.k4),
        2.0 * (2.0 * k.k2 + k.k3),
        4.0 * (-k.k1 - k.k2 - k.k3),
        -4.0 * k.k2 - k.k3,
        -k.k3,
    ]
}

/// Two-point curvature report plus the decomposition it was built from.
#[derive(Clone, Copy, Debug)]
pub struct TwoPointCurvature {
    pub report: CurvatureReport,
    pub decomposition: TDecomposition,
    /// With more than two landmarks present, the closed-form `R₄` is only
    /// an upper bound; the exact value needs the full landmark formula.
    pub r4_is_upper_bound: bool,
}

/// Closed-form curvature for covectors supported on landmarks 1 and 2.
pub fn two_point_curvature(
    landmarks: &Landmarks,
    kernel: &impl RadialKernel,
    alpha: &Covector,
    beta: &Covector,
) -> Result<TwoPointCurvature> {
    let n = landmarks.count();
    if n < 2 {
        return Err(Error::Shape("need at least two landmarks".into()));
    }
    if alpha.0.nrows() != n || beta.0.nrows() != n {
        return Err(Error::Shape(
            "covector shape must match configuration".into(),
        ));
    }
    for a in 2..n {
        if alpha.0.row(a).iter().any(|&v| v != 0.0) || beta.0.row(a).iter().any(|&v| v != 0.0) {
            return Err(Error::Support(format!(
                "covector has momentum at landmark {}",
                a + 1
            )));
        }
    }

    let rho = landmarks.separation(0, 1);
    if rho == 0.0 {
        return Err(Error::Degenerate("coincident landmark pair".into()));
    }
    let u = landmarks.offset(0, 1) / rho;
    let t = t_decomposition(
        &u,
        (&alpha.row(0), &alpha.row(1)),
        (&beta.row(0), &beta.row(1)),
    );
    let k = k_coefficients(kernel, rho);

    let r1 = 4.0 * k.k1 * (t.t1 - t.t3) + 4.0 * k.k2 * (t.t2 - t.t3 - t.t4);
    let r2 = -4.0 * k.k3 * (t.t1 - t.t3);
    let r3 = k.k3 * (2.0 * (t.t1 + t.t2) - 2.0 * t.t3 - t.t4 - t.t5);
    let r4 = -6.0 * (k.k3 * t.t3 + k.k4 * t.t1);

    let g0 = kernel.gamma0();
    let g = kernel.gamma(rho);
    let den = 4.0 * (g0 * g0 - g * g) * (t.t1 + t.t2)
        + 2.0 * (g0 - g) * (g0 - g) * (2.0 * t.t3 + t.t4)
        + 2.0 * (g0 + g) * (g0 + g) * t.t5;

    let report = CurvatureReport::new(
        r1,
        r2,
        r3,
        r4,
        den,
        alpha.0.norm_squared() * beta.0.norm_squared(),
    );
    Ok(TwoPointCurvature {
        report,
        decomposition: t,
        r4_is_upper_bound: n > 2,
    })
}

/// Sectional curvature of two landmarks on the line,
/// `K = (γ₀-γ)/(γ₀+γ) γ'' - (2γ₀-γ)/(γ₀+γ)² γ'²`.
pub fn curvature_l2r1(kernel: &impl RadialKernel, rho: f64) -> f64 {
    let g0 = kernel.gamma0();
    let g = kernel.gamma(rho);
    let dg = kernel.dgamma(rho);
    let ddg = kernel.ddgamma(rho);
    (g0 - g) / (g0 + g) * ddg - (2.0 * g0 - g) / ((g0 + g) * (g0 + g)) * dg * dg
}

/// Radius of the circular two-point orbit, when one exists: the root of
/// `γ₀ - γ(2r) + r γ'(2r)` bracketed on a scan of `search`. Absence of a
/// sign change is a valid result.
pub fn circular_orbit_radius(kernel: &impl RadialKernel, search: (f64, f64)) -> Option<f64> {
    let (lo, hi) = search;
    if !(lo > 0.0 && hi > lo) {
        return None;
    }
    let f = |r: f64| kernel.gamma0() - kernel.gamma(2.0 * r) + r * kernel.dgamma(2.0 * r);
    let count = 2000;
    let step = (hi - lo) / count as f64;
    let mut prev_r = lo;
    let mut prev_f = f(lo);
    for i in 1..=count {
        let r = lo + step * i as f64;
        let fr = f(r);
        if prev_f == 0.0 && prev_r > lo {
            return Some(prev_r);
        }
        if (prev_f < 0.0) != (fr < 0.0) {
            let (mut a, mut b) = (prev_r, r);
            let mut fa = prev_f;
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if b - a < 1e-12 * (1.0 + mid) {
                    break;
                }
                let fm = f(mid);
                if (fa <= 0.0) == (fm <= 0.0) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            return Some(0.5 * (a + b));
        }
        prev_r = r;
        prev_f = fr;
    }
    None
}
