//! Python bindings for the mean-field solver.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tkl::sweep::{Axis, AxisName, Coupling, Observable, Spacing, SweepSpec};
use tkl::{Error, SolverConfig};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(msg) => PyIOError::new_err(msg),
        Error::NonConvergence { .. } | Error::NoConvergedBranch(_) | Error::BracketFailure { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn solver(tol: Option<f64>, max_iter: Option<usize>) -> PyResult<SolverConfig> {
    let mut c = SolverConfig::default();
    if let Some(t) = tol {
        c.tolerance = t;
    }
    if let Some(n) = max_iter {
        c.max_iterations = n;
    }
    c.validate().map_err(to_py)?;
    Ok(c)
}

#[pyclass(name = "ModelParams", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyModelParams {
    inner: tkl::ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (j_aa, j_ab, h = 0.0))]
    fn new(j_aa: f64, j_ab: f64, h: f64) -> Self {
        Self { inner: tkl::ModelParams::new(j_aa, j_ab, h) }
    }

    /// `J_ab = alpha * |J_aa|`.
    #[staticmethod]
    #[pyo3(signature = (j_aa, alpha = 0.025, h = 0.0))]
    fn from_ratio(j_aa: f64, alpha: f64, h: f64) -> Self {
        Self { inner: tkl::ModelParams::from_ratio(j_aa, alpha, h) }
    }

    #[getter]
    fn j_aa(&self) -> f64 {
        self.inner.j_aa
    }

    #[getter]
    fn j_ab(&self) -> f64 {
        self.inner.j_ab
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    fn with_field(&self, h: f64) -> Self {
        Self { inner: self.inner.with_field(h) }
    }

    fn __repr__(&self) -> String {
        format!(
            "ModelParams(j_aa={}, j_ab={}, h={})",
            self.inner.j_aa, self.inner.j_ab, self.inner.h
        )
    }
}

#[pyclass(name = "State", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyState {
    m_a: f64,
    m_b: f64,
    gamma_a: f64,
    gamma_b: f64,
    free_energy: f64,
    iterations: usize,
    residual: f64,
    converged: bool,
    branches: usize,
}

#[pymethods]
impl PyState {
    fn __repr__(&self) -> String {
        format!(
            "State(m_a={}, m_b={}, free_energy={}, branches={})",
            self.m_a, self.m_b, self.free_energy, self.branches
        )
    }
}

/// Eight trimer energies for `(lambda_aa, gamma_a)`, ordered `psi_1 .. psi_8`.
#[pyfunction]
fn trimer_energies(lambda_aa: f64, gamma_a: f64) -> Vec<f64> {
    let f = tkl::EffectiveFields::new(lambda_aa, gamma_a, 0.0);
    tkl::trimer_energies(&f).energies.to_vec()
}

/// `ln Z_0a` of a trimer.
#[pyfunction]
fn trimer_log_partition(lambda_aa: f64, gamma_a: f64, t: f64) -> PyResult<f64> {
    let f = tkl::EffectiveFields::new(lambda_aa, gamma_a, 0.0);
    Ok(tkl::trimer_partition(&f, t).map_err(to_py)?.ln_z)
}

#[pyfunction]
#[pyo3(signature = (params, t, tol = None, max_iter = None))]
fn equilibrium(params: PyModelParams, t: f64, tol: Option<f64>, max_iter: Option<usize>) -> PyResult<PyState> {
    let eq = tkl::equilibrium(&params.inner, t, &solver(tol, max_iter)?).map_err(to_py)?;
    let branches = eq.branch_count();
    let s = eq.state;
    Ok(PyState {
        m_a: s.m_a,
        m_b: s.m_b,
        gamma_a: s.fields.gamma_a,
        gamma_b: s.fields.gamma_b,
        free_energy: s.free_energy_per_site,
        iterations: s.iterations,
        residual: s.residual,
        converged: s.converged,
        branches,
    })
}

#[pyfunction]
fn free_energy_per_site(m_a: f64, m_b: f64, params: PyModelParams, t: f64) -> PyResult<f64> {
    tkl::free_energy_per_site(m_a, m_b, &params.inner, t).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (params, t, step = None))]
fn susceptibility(params: PyModelParams, t: f64, step: Option<f64>) -> PyResult<f64> {
    let step = step.unwrap_or_else(|| tkl::observables::default_field_step(params.inner.h));
    Ok(tkl::susceptibility(&params.inner, t, step, &SolverConfig::default())
        .map_err(to_py)?
        .value)
}

#[pyfunction]
fn zero_field_susceptibility(params: PyModelParams, t: f64) -> PyResult<f64> {
    Ok(tkl::zero_field_susceptibility(&params.inner, t, &SolverConfig::default())
        .map_err(to_py)?
        .value)
}

#[pyfunction]
#[pyo3(signature = (params, t, step = 1e-3))]
fn internal_energy(params: PyModelParams, t: f64, step: f64) -> PyResult<f64> {
    tkl::internal_energy(&params.inner, t, step, &SolverConfig::default()).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (params, t, step = 1e-3))]
fn specific_heat(params: PyModelParams, t: f64, step: f64) -> PyResult<f64> {
    tkl::specific_heat(&params.inner, t, step, &SolverConfig::default()).map_err(to_py)
}

/// Reduced two-site state of a trimer as a dict with keys `u`, `w`, `v`, `y`.
#[pyfunction]
fn reduced_density_matrix<'py>(py: Python<'py>, lambda_aa: f64, gamma_a: f64, t: f64) -> PyResult<Bound<'py, PyDict>> {
    let f = tkl::EffectiveFields::new(lambda_aa, gamma_a, 0.0);
    let x = tkl::reduced_density_matrix(&f, t).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("u", x.u)?;
    d.set_item("w", x.w)?;
    d.set_item("v", x.v)?;
    d.set_item("y", x.y)?;
    d.set_item("concurrence", tkl::concurrence_xstate(&x).value)?;
    Ok(d)
}

#[pyfunction]
fn concurrence(params: PyModelParams, t: f64) -> PyResult<f64> {
    Ok(tkl::concurrence_at(&params.inner, t, &SolverConfig::default())
        .map_err(to_py)?
        .value)
}

/// Critical temperature at zero field. `method` is `"onset"` or `"linearized"`.
#[pyfunction]
#[pyo3(signature = (j_aa, alpha, method = "linearized", bracket = None, tol = 1e-10))]
fn critical_temperature(
    j_aa: f64,
    alpha: f64,
    method: &str,
    bracket: Option<(f64, f64)>,
    tol: f64,
) -> PyResult<f64> {
    let r = match method {
        "onset" => {
            let b = bracket.unwrap_or((1e-4 * j_aa.abs(), j_aa.abs()));
            tkl::critical_temperature_onset(j_aa, alpha, b, tol)
        }
        "linearized" => tkl::critical_temperature_linearized(j_aa, alpha, tol),
        other => return Err(PyValueError::new_err(format!("unknown method `{other}`"))),
    };
    Ok(r.map_err(to_py)?.tc)
}

#[pyfunction]
#[pyo3(signature = (params, bracket, tol = 1e-10))]
fn concurrence_threshold(params: PyModelParams, bracket: (f64, f64), tol: f64) -> PyResult<f64> {
    tkl::concurrence_threshold(&params.inner, bracket, tol, &SolverConfig::default()).map_err(to_py)
}

/// Zero-temperature phase as a dict (`phase`, `m_a`, `m_b`, `concurrence`,
/// `energy`, `degenerate`).
#[pyfunction]
fn zero_temperature_phase<'py>(py: Python<'py>, j_aa: f64, j_ab: f64, h: f64) -> PyResult<Bound<'py, PyDict>> {
    let p = tkl::zero_temperature_phase(j_aa, j_ab, h).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("phase", p.label.tag.name())?;
    d.set_item("m_a", p.label.m_a)?;
    d.set_item("m_b", p.m_b)?;
    d.set_item("concurrence", p.label.concurrence)?;
    d.set_item("ground_states", p.label.ground_states.clone())?;
    d.set_item("energy", p.energy_per_site)?;
    d.set_item("degenerate", p.degenerate_boundary)?;
    Ok(d)
}

#[pyfunction]
fn saturation_field(j_aa: f64, j_ab: f64) -> PyResult<f64> {
    tkl::saturation_field(j_aa, j_ab).map_err(to_py)
}

fn axis_name(s: &str) -> PyResult<AxisName> {
    match s {
        "T" => Ok(AxisName::T),
        "H" => Ok(AxisName::H),
        "J_aa" => Ok(AxisName::JAa),
        "alpha" => Ok(AxisName::Alpha),
        _ => Err(PyValueError::new_err(format!("unknown axis `{s}`"))),
    }
}

/// One-dimensional sweep. Returns a list of dicts keyed by column name; the
/// axis is one of `T`, `H`, `J_aa`, `alpha`.
#[pyfunction]
#[pyo3(signature = (axis, start, stop, count, j_aa = 1.0, alpha = 0.025, h = 0.0, t = 0.1,
                    observables = "m_a,m_b,C", log = false, continuation = false, workers = None))]
#[allow(clippy::too_many_arguments)]
fn sweep<'py>(
    py: Python<'py>,
    axis: &str,
    start: f64,
    stop: f64,
    count: usize,
    j_aa: f64,
    alpha: f64,
    h: f64,
    t: f64,
    observables: &str,
    log: bool,
    continuation: bool,
    workers: Option<usize>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let spacing = if log { Spacing::Log } else { Spacing::Linear };
    let spec = SweepSpec {
        j_aa,
        coupling: Coupling::Ratio(alpha),
        h,
        t,
        axis1: Axis::new(axis_name(axis)?, start, stop, count, spacing).map_err(to_py)?,
        axis2: None,
        observables: Observable::parse_list(observables).map_err(to_py)?,
        continuation,
        solver: SolverConfig::default(),
        workers,
    };
    let rows = py.detach(|| tkl::sweep::run_sweep(&spec)).map_err(to_py)?;
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("T", r.t)?;
            d.set_item("H", r.h)?;
            d.set_item("J_aa", r.j_aa)?;
            d.set_item("J_ab", r.j_ab)?;
            d.set_item("alpha", r.alpha)?;
            for (o, v) in &r.values {
                d.set_item(o.column(), *v)?;
            }
            d.set_item("converged", r.converged)?;
            d.set_item("branches", r.branches)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
#[pyo3(name = "tkl_meanfield")]
fn tkl_meanfield_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", tkl::VERSION)?;
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(trimer_energies, m)?)?;
    m.add_function(wrap_pyfunction!(trimer_log_partition, m)?)?;
    m.add_function(wrap_pyfunction!(equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(free_energy_per_site, m)?)?;
    m.add_function(wrap_pyfunction!(susceptibility, m)?)?;
    m.add_function(wrap_pyfunction!(zero_field_susceptibility, m)?)?;
    m.add_function(wrap_pyfunction!(internal_energy, m)?)?;
    m.add_function(wrap_pyfunction!(specific_heat, m)?)?;
    m.add_function(wrap_pyfunction!(reduced_density_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(concurrence, m)?)?;
    m.add_function(wrap_pyfunction!(critical_temperature, m)?)?;
    m.add_function(wrap_pyfunction!(concurrence_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(zero_temperature_phase, m)?)?;
    m.add_function(wrap_pyfunction!(saturation_field, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
