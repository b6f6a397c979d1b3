//! Python bindings for `kbp-core`.
//!
//! Scalars and short vectors come back as Python numbers, lists and tuples;
//! composite documents (constants table, construction result, certificate,
//! selftest report) come back as the same stable JSON text the command-line
//! tool writes.

use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyException, PyValueError};
use pyo3::prelude::*;

use kbp_core::certify::{certify_with_doubling, MAX_DEGREE};
use kbp_core::construct::{verify_claims, DEFAULT_EPS, DEFAULT_GRID, DEFAULT_S0};
use kbp_core::output::to_stable_json;
use kbp_core::{specfun, transforms, BumpVariant, ConstructionParams, DimPair, Error, RadialProfile, Transition};

create_exception!(
    kbp,
    CertificateNotFound,
    PyException,
    "No negative Bernstein moment up to the maximum degree."
);

fn to_py(err: Error) -> PyErr {
    match err {
        Error::CertificateNotFound { .. } => CertificateNotFound::new_err(err.to_string()),
        Error::Accuracy { .. } | Error::Inconsistent(_) => PyArithmeticError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

trait OrPyErr<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPyErr<T> for kbp_core::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn parse_transition(name: &str) -> PyResult<Transition> {
    match name {
        "quintic" => Ok(Transition::Quintic),
        "smooth" => Ok(Transition::Smooth),
        other => Err(PyValueError::new_err(format!(
            "transition must be 'quintic' or 'smooth', got '{other}'"
        ))),
    }
}

fn parse_variant(name: &str) -> PyResult<BumpVariant> {
    match name {
        "parabola" => Ok(BumpVariant::Parabola),
        "glued" => Ok(BumpVariant::Glued(Transition::default())),
        other => Err(PyValueError::new_err(format!(
            "variant must be 'parabola' or 'glued', got '{other}'"
        ))),
    }
}

fn params(n: u32, k: u32, s0: f64, eps: f64, variant: &str) -> PyResult<ConstructionParams> {
    ConstructionParams::new(DimPair::new(n, k).py_err()?, s0, eps, parse_variant(variant)?).py_err()
}

fn spec(n: u32, m: u32) -> PyResult<transforms::TransformSpec> {
    transforms::TransformSpec::new(n, m).py_err()
}

/// A continuous profile function on `[0, 1]`.
#[pyclass(name = "Profile", module = "kbp", frozen)]
struct Profile {
    inner: RadialProfile,
}

#[pymethods]
impl Profile {
    #[staticmethod]
    fn constant(value: f64) -> Self {
        Self {
            inner: RadialProfile::constant(value),
        }
    }

    /// `sum_j coeffs[j] t^j`
    #[staticmethod]
    fn monomial(coeffs: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: RadialProfile::monomial(coeffs).py_err()?,
        })
    }

    #[staticmethod]
    fn bernstein(degree: usize, coeffs: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: RadialProfile::bernstein(degree, coeffs).py_err()?,
        })
    }

    #[staticmethod]
    fn parabola_bump(s0: f64, eps: f64, gamma_star: f64) -> PyResult<Self> {
        Ok(Self {
            inner: RadialProfile::parabola_bump(s0, eps, gamma_star).py_err()?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (s0, eps, gamma_star, transition = "quintic"))]
    fn glued_bump(s0: f64, eps: f64, gamma_star: f64, transition: &str) -> PyResult<Self> {
        Ok(Self {
            inner: RadialProfile::glued_bump(s0, eps, gamma_star, parse_transition(transition)?).py_err()?,
        })
    }

    /// Natural cubic spline through `(grid[i], values[i])`.
    #[staticmethod]
    fn sampled(grid: Vec<f64>, values: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: RadialProfile::sampled(grid, values).py_err()?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        to_stable_json(&self.inner).py_err()
    }

    fn evaluate(&self, t: f64) -> PyResult<f64> {
        self.inner.evaluate(t).py_err()
    }

    fn __call__(&self, t: f64) -> PyResult<f64> {
        self.evaluate(t)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }

    fn sup_abs_derivative(&self) -> f64 {
        self.inner.sup_abs_derivative()
    }

    /// Monomial coefficients, lowest power first.
    fn to_monomial(&self) -> PyResult<Vec<f64>> {
        Ok(self.inner.to_monomial().py_err()?.coeffs().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Profile({})", to_stable_json(&self.inner).unwrap_or_default())
    }
}

#[pyfunction]
fn log_gamma(x: f64) -> PyResult<f64> {
    specfun::log_gamma(x).py_err()
}

#[pyfunction]
fn beta(a: f64, b: f64) -> PyResult<f64> {
    specfun::beta(a, b).py_err()
}

#[pyfunction]
fn reg_inc_beta(x: f64, a: f64, b: f64) -> PyResult<f64> {
    specfun::reg_inc_beta(x, a, b).py_err()
}

/// Constants table for `(n, k)` as JSON.
#[pyfunction]
fn constants(n: u32, k: u32) -> PyResult<String> {
    to_stable_json(&kbp_core::ConstantsTable::new(DimPair::new(n, k).py_err()?).py_err()?).py_err()
}

#[pyfunction]
fn forward(py: Python<'_>, n: u32, m: u32, f: &Profile, s: f64) -> PyResult<f64> {
    let spec = spec(n, m)?;
    py.detach(|| kbp_core::forward(spec, &f.inner, s)).py_err()
}

#[pyfunction]
fn dual(py: Python<'_>, n: u32, m: u32, g: &Profile, t: f64) -> PyResult<f64> {
    let spec = spec(n, m)?;
    py.detach(|| kbp_core::dual(spec, &g.inner, t)).py_err()
}

#[pyfunction]
fn perp_dual(py: Python<'_>, n: u32, m: u32, g: &Profile, t: f64) -> PyResult<f64> {
    let spec = spec(n, m)?;
    py.detach(|| kbp_core::perp_dual(spec, &g.inner, t)).py_err()
}

#[pyfunction]
fn pairing(py: Python<'_>, n: u32, k: u32, g: &Profile, p: &Profile) -> PyResult<f64> {
    let dims = DimPair::new(n, k).py_err()?;
    py.detach(|| kbp_core::pairing(dims, &g.inner, &p.inner)).py_err()
}

/// `(lhs, rhs, relative_error)` of the duality relation.
#[pyfunction]
fn duality_check(py: Python<'_>, n: u32, m: u32, f: &Profile, g: &Profile) -> PyResult<(f64, f64, f64)> {
    let c = py
        .detach(|| kbp_core::duality_check(n, m, &f.inner, &g.inner))
        .py_err()?;
    Ok((c.lhs, c.rhs, c.relative_error))
}

/// `(delta1, delta2, delta)`
#[pyfunction]
fn window_deltas(s0: f64, eps: f64) -> PyResult<(f64, f64, f64)> {
    let d = kbp_core::window_deltas(s0, eps).py_err()?;
    Ok((d.delta1, d.delta2, d.delta))
}

#[pyfunction]
fn gamma_sup(n: u32, delta: f64) -> PyResult<f64> {
    kbp_core::gamma_sup(n, delta).py_err()
}

/// Construction result as JSON; `grid` adds the transform-claim check.
#[pyfunction]
#[pyo3(signature = (n, k, s0 = DEFAULT_S0, eps = DEFAULT_EPS, variant = "parabola", grid = None))]
fn construct(
    py: Python<'_>,
    n: u32,
    k: u32,
    s0: f64,
    eps: f64,
    variant: &str,
    grid: Option<usize>,
) -> PyResult<String> {
    let p = params(n, k, s0, eps, variant)?;
    let result = py
        .detach(|| {
            let built = kbp_core::build_g(&p)?;
            match grid {
                Some(size) => verify_claims(&built, p.dims, size),
                None => Ok(built),
            }
        })
        .py_err()?;
    to_stable_json(&result).py_err()
}

/// Certificate bundle as JSON; raises `CertificateNotFound` when no degree up
/// to the maximum yields a negative moment.
#[pyfunction]
#[pyo3(signature = (n, k, s0 = DEFAULT_S0, eps = DEFAULT_EPS, variant = "parabola", degree = 400, emit_moments = false, g = None))]
#[allow(clippy::too_many_arguments)]
fn certify(
    py: Python<'_>,
    n: u32,
    k: u32,
    s0: f64,
    eps: f64,
    variant: &str,
    degree: usize,
    emit_moments: bool,
    g: Option<&Profile>,
) -> PyResult<String> {
    let p = params(n, k, s0, eps, variant)?;
    let override_g = g.map(|g| g.inner.clone());
    let cert = py
        .detach(|| {
            let profile = match override_g {
                Some(g) => g,
                None => kbp_core::build_g(&p)?.g,
            };
            certify_with_doubling(&p, &profile, degree, MAX_DEGREE)
        })
        .py_err()?;
    to_stable_json(&cert.to_bundle(emit_moments)).py_err()
}

/// `[(t, rho_K(t))]` on a uniform grid.
#[pyfunction]
#[pyo3(signature = (n, k, s0 = DEFAULT_S0, eps = DEFAULT_EPS, variant = "parabola", grid = DEFAULT_GRID))]
fn body_profile(
    py: Python<'_>,
    n: u32,
    k: u32,
    s0: f64,
    eps: f64,
    variant: &str,
    grid: usize,
) -> PyResult<Vec<(f64, f64)>> {
    let p = params(n, k, s0, eps, variant)?;
    py.detach(|| kbp_core::body_profile(&p, grid)).py_err()
}

/// Invariant-suite report as JSON.
#[pyfunction]
#[pyo3(signature = (seed = kbp_core::selftest::DEFAULT_SEED))]
fn selftest(py: Python<'_>, seed: u64) -> PyResult<String> {
    let report = py.detach(|| kbp_core::selftest::run(seed));
    to_stable_json(&report).py_err()
}

#[pymodule]
fn kbp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Profile>()?;
    m.add("CertificateNotFound", m.py().get_type::<CertificateNotFound>())?;
    m.add_function(wrap_pyfunction!(log_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(beta, m)?)?;
    m.add_function(wrap_pyfunction!(reg_inc_beta, m)?)?;
    m.add_function(wrap_pyfunction!(constants, m)?)?;
    m.add_function(wrap_pyfunction!(forward, m)?)?;
    m.add_function(wrap_pyfunction!(dual, m)?)?;
    m.add_function(wrap_pyfunction!(perp_dual, m)?)?;
    m.add_function(wrap_pyfunction!(pairing, m)?)?;
    m.add_function(wrap_pyfunction!(duality_check, m)?)?;
    m.add_function(wrap_pyfunction!(window_deltas, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_sup, m)?)?;
    m.add_function(wrap_pyfunction!(construct, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(body_profile, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
