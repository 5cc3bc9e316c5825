//! Python bindings: kernels, curvature reports, geodesic shooting and the
//! two-point machinery, with plain nested lists as the array interchange.

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use landmarks::curvature::CurvatureReport;
use landmarks::geodesics;
use landmarks::kernels::{self, MaternOrder, RadialKernel};
use landmarks::landmark_curvature;
use landmarks::manifold::{Covector, Landmarks};
use landmarks::two_point;
use landmarks::Error as LibError;

fn lib_err(err: LibError) -> PyErr {
    match err {
        LibError::InvalidKernel(_) | LibError::Shape(_) | LibError::Support(_) => {
            PyValueError::new_err(err.to_string())
        }
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

fn to_matrix(rows: &[Vec<f64>], what: &str) -> PyResult<DMatrix<f64>> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(PyValueError::new_err(format!(
            "{what} must be a non-empty 2d list"
        )));
    }
    let d = rows[0].len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err(format!(
            "{what} rows must have equal length"
        )));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(rows.len(), d, &flat))
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|a| (0..m.ncols()).map(|i| m[(a, i)]).collect())
        .collect()
}

fn landmarks_of(rows: &[Vec<f64>]) -> PyResult<Landmarks> {
    Landmarks::new(to_matrix(rows, "q")?).map_err(lib_err)
}

fn report_dict<'py>(py: Python<'py>, report: &CurvatureReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("r1", report.r1)?;
    d.set_item("r2", report.r2)?;
    d.set_item("r3", report.r3)?;
    d.set_item("r4", report.r4)?;
    d.set_item("numerator", report.numerator)?;
    d.set_item("denominator", report.denominator)?;
    d.set_item("sectional", report.sectional)?;
    Ok(d)
}

/// A rotationally invariant scalar kernel (gaussian, matern, cauchy).
#[pyclass(name = "Kernel", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyKernel {
    inner: kernels::Kernel,
}

#[pymethods]
impl PyKernel {
    /// Kernel(family, scale, order=None): order is one of "1/2", "3/2",
    /// "5/2", "7/2" and only used by the matern family.
    #[new]
    #[pyo3(signature = (family, scale, order=None))]
    fn new(family: &str, scale: f64, order: Option<&str>) -> PyResult<Self> {
        let inner = match family {
            "gaussian" => kernels::Kernel::gaussian(scale),
            "cauchy" => kernels::Kernel::cauchy(scale),
            "matern" => {
                let order = order.ok_or_else(|| {
                    PyValueError::new_err("matern kernel needs an order (\"1/2\"..\"7/2\")")
                })?;
                MaternOrder::parse(order).and_then(|o| kernels::Kernel::matern(scale, o))
            }
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown family {other:?}; expected gaussian, matern or cauchy"
                )))
            }
        }
        .map_err(lib_err)?;
        Ok(PyKernel { inner })
    }

    /// Parse the JSON grammar, e.g. `{"family":"gaussian","scale":1.0}`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: kernels::Kernel = serde_json::from_str(text)
            .map_err(|e| PyValueError::new_err(format!("malformed kernel JSON: {e}")))?;
        inner.validate().map_err(lib_err)?;
        Ok(PyKernel { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn gamma(&self, rho: f64) -> f64 {
        self.inner.gamma(rho)
    }

    fn dgamma(&self, rho: f64) -> f64 {
        self.inner.dgamma(rho)
    }

    fn ddgamma(&self, rho: f64) -> f64 {
        self.inner.ddgamma(rho)
    }

    /// (γ, γ', γ'') at a radius.
    fn gamma_derivs(&self, rho: f64) -> (f64, f64, f64) {
        kernels::gamma_derivs(&self.inner, rho)
    }

    fn scale(&self) -> f64 {
        self.inner.scale()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// Hamiltonian ½ Σ K(q^a - q^b) ⟨p_a, p_b⟩.
#[pyfunction]
fn hamiltonian(kernel: &PyKernel, q: Vec<Vec<f64>>, p: Vec<Vec<f64>>) -> PyResult<f64> {
    let lm = landmarks_of(&q)?;
    let p = Covector(to_matrix(&p, "p")?);
    Ok(geodesics::hamiltonian(&lm, &kernel.inner, &p))
}

/// Full curvature report for a pair of covectors on a configuration.
#[pyfunction]
fn curvature_report<'py>(
    py: Python<'py>,
    kernel: &PyKernel,
    q: Vec<Vec<f64>>,
    alpha: Vec<Vec<f64>>,
    beta: Vec<Vec<f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let lm = landmarks_of(&q)?;
    let alpha = Covector(to_matrix(&alpha, "alpha")?);
    let beta = Covector(to_matrix(&beta, "beta")?);
    let report =
        landmark_curvature::curvature_terms(&lm, &kernel.inner, &alpha, &beta).map_err(lib_err)?;
    report_dict(py, &report)
}

/// Curvature when all momentum sits on the first landmark.
#[pyfunction]
fn one_momentum_curvature<'py>(
    py: Python<'py>,
    kernel: &PyKernel,
    q: Vec<Vec<f64>>,
    alpha1: Vec<f64>,
    beta1: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let lm = landmarks_of(&q)?;
    let report = landmark_curvature::one_momentum_curvature(
        &lm,
        &kernel.inner,
        &DVector::from_vec(alpha1),
        &DVector::from_vec(beta1),
    )
    .map_err(lib_err)?;
    report_dict(py, &report)
}

/// Closed-form curvature for covectors supported on landmarks 1 and 2,
/// with the five-term decomposition attached.
#[pyfunction]
fn two_point_curvature<'py>(
    py: Python<'py>,
    kernel: &PyKernel,
    q: Vec<Vec<f64>>,
    alpha: Vec<Vec<f64>>,
    beta: Vec<Vec<f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let lm = landmarks_of(&q)?;
    let alpha = Covector(to_matrix(&alpha, "alpha")?);
    let beta = Covector(to_matrix(&beta, "beta")?);
    let result =
        two_point::two_point_curvature(&lm, &kernel.inner, &alpha, &beta).map_err(lib_err)?;
    let d = report_dict(py, &result.report)?;
    d.set_item(
        "t",
        (
            result.decomposition.t1,
            result.decomposition.t2,
            result.decomposition.t3,
            result.decomposition.t4,
            result.decomposition.t5,
        ),
    )?;
    d.set_item("r4_is_upper_bound", result.r4_is_upper_bound)?;
    Ok(d)
}

/// Shoot a geodesic; returns times, configuration and momentum samples,
/// and the recorded Hamiltonian values.
#[pyfunction]
fn integrate<'py>(
    py: Python<'py>,
    kernel: &PyKernel,
    q: Vec<Vec<f64>>,
    p: Vec<Vec<f64>>,
    t_end: f64,
    steps: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let lm = landmarks_of(&q)?;
    let p = Covector(to_matrix(&p, "p")?);
    let path = geodesics::integrate(&lm, &p, &kernel.inner, t_end, steps).map_err(lib_err)?;
    let d = PyDict::new(py);
    d.set_item("times", &path.times)?;
    d.set_item(
        "q",
        path.q_samples.iter().map(matrix_rows).collect::<Vec<_>>(),
    )?;
    d.set_item(
        "p",
        path.p_samples.iter().map(matrix_rows).collect::<Vec<_>>(),
    )?;
    d.set_item("hamiltonian", &path.hamiltonian_samples)?;
    d.set_item("hamiltonian_drift", path.hamiltonian_drift())?;
    Ok(d)
}

/// Advect passive points under the flow of a geodesic; returns one M x D
/// sample per recorded time.
#[pyfunction]
fn advect(
    kernel: &PyKernel,
    q: Vec<Vec<f64>>,
    p: Vec<Vec<f64>>,
    passive: Vec<Vec<f64>>,
    t_end: f64,
    steps: usize,
) -> PyResult<Vec<Vec<Vec<f64>>>> {
    let lm = landmarks_of(&q)?;
    let p = Covector(to_matrix(&p, "p")?);
    let passive = to_matrix(&passive, "passive")?;
    let path = geodesics::integrate(&lm, &p, &kernel.inner, t_end, steps).map_err(lib_err)?;
    Ok(geodesics::advect(&path, &kernel.inner, &passive)
        .iter()
        .map(matrix_rows)
        .collect())
}

/// Classify a two-landmark geodesic: "scattering", "capture_forward" or
/// "capture_backward".
#[pyfunction]
fn classify(kernel: &PyKernel, q: Vec<Vec<f64>>, p: Vec<Vec<f64>>) -> PyResult<String> {
    let qm = to_matrix(&q, "q")?;
    let pm = to_matrix(&p, "p")?;
    if qm.nrows() != 2 || pm.nrows() != 2 {
        return Err(PyValueError::new_err(
            "classification needs exactly two landmarks",
        ));
    }
    let state = two_point::to_mean_diff(
        &qm.row(0).transpose(),
        &qm.row(1).transpose(),
        &pm.row(0).transpose(),
        &pm.row(1).transpose(),
    )
    .map_err(lib_err)?;
    let class = two_point::classify(&state, &kernel.inner).map_err(lib_err)?;
    Ok(class.as_str().to_string())
}

/// Solve the reduced radial/angle/mean system for a two-landmark geodesic.
#[pyfunction]
#[pyo3(signature = (kernel, q, p, t_end, tol=1e-9))]
fn solve_two_point<'py>(
    py: Python<'py>,
    kernel: &PyKernel,
    q: Vec<Vec<f64>>,
    p: Vec<Vec<f64>>,
    t_end: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let qm = to_matrix(&q, "q")?;
    let pm = to_matrix(&p, "p")?;
    if qm.nrows() != 2 || pm.nrows() != 2 {
        return Err(PyValueError::new_err(
            "two-point solve needs exactly two landmarks",
        ));
    }
    let state = two_point::to_mean_diff(
        &qm.row(0).transpose(),
        &qm.row(1).transpose(),
        &pm.row(0).transpose(),
        &pm.row(1).transpose(),
    )
    .map_err(lib_err)?;
    let cons = two_point::conserved(&state, &kernel.inner);
    let sol = two_point::solve_two_point(&state, &kernel.inner, t_end, tol).map_err(lib_err)?;
    let d = PyDict::new(py);
    d.set_item("times", &sol.times)?;
    d.set_item("rho", &sol.rho)?;
    d.set_item("theta", &sol.theta)?;
    d.set_item(
        "qbar",
        sol.qbar
            .iter()
            .map(|v| v.iter().copied().collect::<Vec<f64>>())
            .collect::<Vec<_>>(),
    )?;
    d.set_item("energy", cons.energy)?;
    d.set_item("omega", cons.omega)?;
    Ok(d)
}

/// Sectional curvature of two landmarks on the line at separation rho.
#[pyfunction]
fn curvature_l2r1(kernel: &PyKernel, rho: f64) -> f64 {
    two_point::curvature_l2r1(&kernel.inner, rho)
}

/// The coefficients (k1, k2, k3, k4) of the two-point curvature formula.
#[pyfunction]
fn k_coefficients(kernel: &PyKernel, rho: f64) -> (f64, f64, f64, f64) {
    let k = two_point::k_coefficients(&kernel.inner, rho);
    (k.k1, k.k2, k.k3, k.k4)
}

/// Radius of a circular two-point orbit when the defining equation has a
/// root in the search interval; None otherwise.
#[pyfunction]
fn circular_orbit_radius(kernel: &PyKernel, lo: f64, hi: f64) -> Option<f64> {
    two_point::circular_orbit_radius(&kernel.inner, (lo, hi))
}

/// Relative gap between the cometric-side numerator and the classical
/// Christoffel route on a landmark section.
#[pyfunction]
fn oracle_residual(
    kernel: &PyKernel,
    q: Vec<Vec<f64>>,
    alpha: Vec<Vec<f64>>,
    beta: Vec<Vec<f64>>,
) -> PyResult<f64> {
    use landmarks::cometric::LandmarkCometric;
    use landmarks::curvature;

    let qm = to_matrix(&q, "q")?;
    let (n, dim) = (qm.nrows(), qm.ncols());
    let model = LandmarkCometric::new(n, dim, kernel.inner);
    let x = LandmarkCometric::<kernels::Kernel>::flatten(&qm);
    let a = DVector::from_vec(LandmarkCometric::<kernels::Kernel>::flatten(&to_matrix(
        &alpha, "alpha",
    )?));
    let b = DVector::from_vec(LandmarkCometric::<kernels::Kernel>::flatten(&to_matrix(
        &beta, "beta",
    )?));
    let fast = curvature::cometric_numerator(&model, &x, &a, &b).map_err(lib_err)?;
    let classical = curvature::classical_numerator(&model, &x, &a, &b).map_err(lib_err)?;
    Ok((fast - classical).abs() / (1.0 + classical.abs()))
}

#[pymodule]
fn landmarks_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKernel>()?;
    m.add_function(wrap_pyfunction!(hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(curvature_report, m)?)?;
    m.add_function(wrap_pyfunction!(one_momentum_curvature, m)?)?;
    m.add_function(wrap_pyfunction!(two_point_curvature, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(advect, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(solve_two_point, m)?)?;
    m.add_function(wrap_pyfunction!(curvature_l2r1, m)?)?;
    m.add_function(wrap_pyfunction!(k_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(circular_orbit_radius, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_residual, m)?)?;
    Ok(())
}
