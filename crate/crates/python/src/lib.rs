//! Python bindings: parameters, integration, trajectory analysis and the
//! closed-form crossing quantities.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lzb::analysis;
use lzb::cli::presets;
use lzb::dynamics::{self, DriveSpec, IntegratorConfig};
use lzb::lz;
use lzb::model::{self, BlochState, DissipatorParams, HamiltonianParams, RelaxationMode};
use lzb::spectral::{self, Window};
use lzb::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        e if e.is_numerical() => PyArithmeticError::new_err(e.to_string()),
        e @ Error::Io { .. } => PyOSError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

/// Hamiltonian, dissipator and relaxation mode of a two-level system.
#[pyclass(name = "SystemParams", module = "lz_bloch", from_py_object)]
#[derive(Clone)]
struct PySystemParams {
    inner: model::SystemParams,
}

#[pymethods]
impl PySystemParams {
    #[new]
    #[pyo3(signature = (
        delta, omega0 = 0.0, *, b0 = 1.0, delta_prime = 0.0,
        gamma1 = 0.0, gamma2 = 0.0, gamma3 = 0.0, alpha = 0.0, beta = 0.0, gamma_sym = 0.0,
        c1 = 0.0, c2 = 0.0, c3 = 0.0, relaxation_mode = "none"
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        delta: f64,
        omega0: f64,
        b0: f64,
        delta_prime: f64,
        gamma1: f64,
        gamma2: f64,
        gamma3: f64,
        alpha: f64,
        beta: f64,
        gamma_sym: f64,
        c1: f64,
        c2: f64,
        c3: f64,
        relaxation_mode: &str,
    ) -> PyResult<Self> {
        let inner = model::SystemParams {
            hamiltonian: HamiltonianParams {
                delta,
                delta_prime,
                b0,
                omega0_freq: omega0,
            },
            dissipator: DissipatorParams {
                gamma1,
                gamma2,
                gamma3,
                alpha,
                beta,
                gamma_sym,
                c1,
                c2,
                c3,
            },
            relaxation_mode: relaxation_mode.parse::<RelaxationMode>().map_err(to_py)?,
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Parameters of a reference figure, e.g. "fig8".
    #[staticmethod]
    fn preset(id: &str) -> PyResult<Self> {
        Ok(Self {
            inner: presets::preset(id).map_err(to_py)?.params,
        })
    }

    /// Transverse rate `gamma_r` on X and Y and longitudinal rate `gamma` on Z.
    #[staticmethod]
    #[pyo3(signature = (delta, omega0, gamma_r, gamma, relaxation_mode = "homogeneous", b0 = 1.0))]
    fn uniaxial(
        delta: f64,
        omega0: f64,
        gamma_r: f64,
        gamma: f64,
        relaxation_mode: &str,
        b0: f64,
    ) -> PyResult<Self> {
        let inner = model::SystemParams {
            hamiltonian: HamiltonianParams {
                b0,
                ..HamiltonianParams::new(delta, omega0)
            },
            dissipator: DissipatorParams::uniaxial(gamma_r, gamma),
            relaxation_mode: relaxation_mode.parse::<RelaxationMode>().map_err(to_py)?,
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.hamiltonian.delta
    }

    #[getter]
    fn omega0(&self) -> f64 {
        self.inner.hamiltonian.omega0_freq
    }

    #[getter]
    fn b0(&self) -> f64 {
        self.inner.hamiltonian.b0
    }

    #[getter]
    fn slope(&self) -> f64 {
        self.inner.hamiltonian.slope()
    }

    #[getter]
    fn relaxation_mode(&self) -> &'static str {
        self.inner.relaxation_mode.as_str()
    }

    /// Dissipator entries as a dict.
    fn rates<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = &self.inner.dissipator;
        let out = PyDict::new(py);
        for (k, v) in [
            ("gamma1", d.gamma1),
            ("gamma2", d.gamma2),
            ("gamma3", d.gamma3),
            ("alpha", d.alpha),
            ("beta", d.beta),
            ("gamma_sym", d.gamma_sym),
            ("c1", d.c1),
            ("c2", d.c2),
            ("c3", d.c3),
        ] {
            out.set_item(k, v)?;
        }
        Ok(out)
    }

    /// Complete-positivity audit: `(passed, [(id, residual, passed), ...])`.
    fn cp_audit(&self) -> (bool, Vec<(String, f64, bool)>) {
        audit_tuple(&self.inner.dissipator)
    }

    fn __repr__(&self) -> String {
        let h = &self.inner.hamiltonian;
        format!(
            "SystemParams(delta={}, omega0={}, b0={}, relaxation_mode='{}')",
            h.delta,
            h.omega0_freq,
            h.b0,
            self.inner.relaxation_mode.as_str()
        )
    }
}

fn audit_tuple(d: &DissipatorParams) -> (bool, Vec<(String, f64, bool)>) {
    let r = model::cp_audit(d);
    (
        r.pass,
        r.checks
            .iter()
            .map(|c| (c.id.to_string(), c.residual, c.pass))
            .collect(),
    )
}

/// Sampled solution of the Bloch equation.
#[pyclass(name = "Trajectory", module = "lz_bloch")]
struct PyTrajectory {
    inner: dynamics::Trajectory,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.inner.x()
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.inner.y()
    }

    #[getter]
    fn z(&self) -> Vec<f64> {
        self.inner.z()
    }

    #[getter]
    fn omega0(&self) -> Vec<f64> {
        self.inner.omega0()
    }

    /// Drive zeros inside the span.
    #[getter]
    fn events(&self) -> Vec<f64> {
        self.inner.events.clone()
    }

    #[getter]
    fn final_state(&self) -> (f64, f64, f64) {
        let v = self.inner.final_state();
        (v.x, v.y, v.z)
    }

    /// `(accepted, rejected, rhs_evals)` of the integrator.
    #[getter]
    fn solver_stats(&self) -> (usize, usize, usize) {
        let s = self.inner.stats;
        (s.accepted, s.rejected, s.rhs_evals)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn kinks(&self) -> Vec<f64> {
        analysis::kinks(&self.inner)
    }

    /// One dict per drive period: cycle, z_mean, z_min, z_max, kink_times.
    fn cycle_stats<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        analysis::cycle_stats(&self.inner)
            .map_err(to_py)?
            .into_iter()
            .map(|c| {
                let d = PyDict::new(py);
                d.set_item("cycle", c.cycle_index)?;
                d.set_item("z_mean", c.z_mean)?;
                d.set_item("z_min", c.z_min)?;
                d.set_item("z_max", c.z_max)?;
                d.set_item("kink_times", c.kink_times)?;
                Ok(d)
            })
            .collect()
    }

    /// One dict per drive period: cycle, b, z, area, normalized_area, closure.
    fn hysteresis<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        analysis::hysteresis(&self.inner)
            .map_err(to_py)?
            .into_iter()
            .map(|l| {
                let d = PyDict::new(py);
                let (b, z): (Vec<f64>, Vec<f64>) = l.points.into_iter().unzip();
                d.set_item("cycle", l.cycle_index)?;
                d.set_item("b", b)?;
                d.set_item("z", z)?;
                d.set_item("area", l.area)?;
                d.set_item("normalized_area", l.normalized_area)?;
                d.set_item("closure", l.closure)?;
                Ok(d)
            })
            .collect()
    }

    fn pulse_asymmetry(&self) -> PyResult<Vec<f64>> {
        analysis::pulse_asymmetry(&self.inner).map_err(to_py)
    }

    /// `[(t_onset, nearest_zero, offset_in_periods), ...]`.
    fn reversal_onsets(&self) -> PyResult<Vec<(f64, f64, f64)>> {
        Ok(analysis::reversal_onsets(&self.inner)
            .map_err(to_py)?
            .into_iter()
            .map(|o| (o.t_onset, o.nearest_zero, o.offset))
            .collect())
    }

    fn summary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = analysis::summarize(&self.inner);
        let d = PyDict::new(py);
        d.set_item("z_final", s.z_final)?;
        d.set_item("z_mean", s.z_mean)?;
        d.set_item("z_min", s.z_min)?;
        d.set_item("z_max", s.z_max)?;
        d.set_item("n_kinks", s.n_kinks)?;
        d.set_item("mean_area", s.mean_area)?;
        d.set_item("mean_asymmetry", s.mean_asymmetry)?;
        Ok(d)
    }

    /// Transform of one component ("x", "y" or "z"): `(omega, values)`.
    #[pyo3(signature = (component = "z", window = "hann"))]
    fn spectrum(&self, component: &str, window: &str) -> PyResult<(Vec<f64>, Vec<Complex64>)> {
        let c = component.parse().map_err(to_py)?;
        let w = window.parse().map_err(to_py)?;
        let s = spectral::spectrum_of_trajectory(&self.inner, c, w).map_err(to_py)?;
        Ok(s.into_iter().map(|s| (s.omega, s.value)).unzip())
    }

    fn write_csv(&self, path: std::path::PathBuf) -> PyResult<()> {
        let file = std::fs::File::create(&path).map_err(|e| PyOSError::new_err(e.to_string()))?;
        lzb::export::write_trajectory(std::io::BufWriter::new(file), &self.inner).map_err(to_py)
    }
}

/// Integrates from `v0` over `t_span`.
///
/// The drive is the cosine stored in `params` unless `sweep_slope` is given,
/// which selects `omega0(t) = sweep_slope * t`. Integrator settings left as
/// None take their drive-scaled defaults.
#[pyfunction]
#[pyo3(signature = (
    params, v0, t_span, *, sweep_slope = None, rtol = None, atol = None,
    dt_max = None, sample_dt = None, max_steps = None
))]
#[allow(clippy::too_many_arguments)]
fn integrate(
    py: Python<'_>,
    params: &PySystemParams,
    v0: (f64, f64, f64),
    t_span: (f64, f64),
    sweep_slope: Option<f64>,
    rtol: Option<f64>,
    atol: Option<f64>,
    dt_max: Option<f64>,
    sample_dt: Option<f64>,
    max_steps: Option<usize>,
) -> PyResult<PyTrajectory> {
    let drive = match sweep_slope {
        Some(s) => DriveSpec::linear_sweep(s, t_span.0, t_span.1),
        None => DriveSpec::from_hamiltonian(&params.inner.hamiltonian),
    };
    let mut cfg = IntegratorConfig::for_drive(&drive, t_span);
    if let Some(h) = dt_max {
        cfg.dt_max = h;
        cfg.dt_init = h / 100.0;
        cfg.sample_dt = h / 10.0;
    }
    cfg.rtol = rtol.unwrap_or(cfg.rtol);
    cfg.atol = atol.unwrap_or(cfg.atol);
    cfg.sample_dt = sample_dt.unwrap_or(cfg.sample_dt);
    cfg.max_steps = max_steps.unwrap_or(cfg.max_steps);
    let p = params.inner;
    let state = BlochState::new(v0.0, v0.1, v0.2);
    let inner = py
        .detach(|| dynamics::integrate(&p, &drive, state, t_span, &cfg))
        .map_err(to_py)?;
    Ok(PyTrajectory { inner })
}

/// Runs a reference figure with its own initial state and span.
#[pyfunction]
fn run_preset(py: Python<'_>, id: &str) -> PyResult<PyTrajectory> {
    let s = presets::preset(id).map_err(to_py)?.scenario();
    let inner = py
        .detach(|| dynamics::integrate(&s.system, &s.drive, s.initial, s.t_span, &s.integrator))
        .map_err(to_py)?;
    Ok(PyTrajectory { inner })
}

#[pyfunction]
fn preset_ids() -> Vec<&'static str> {
    presets::PRESET_IDS.to_vec()
}

#[pyfunction]
fn lz_nu(delta: f64, slope: f64) -> PyResult<f64> {
    lz::lz_nu(delta, slope).map_err(to_py)
}

#[pyfunction]
fn transfer_ratio(nu: f64) -> f64 {
    lz::transfer_ratio(nu)
}

/// `{"nu", "theta", "phi", "T", "s"}` with `s` as nested lists of complex.
#[pyfunction]
fn s_matrix<'py>(py: Python<'py>, nu: f64) -> PyResult<Bound<'py, PyDict>> {
    let s = lz::s_matrix(nu).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("nu", s.nu)?;
    d.set_item("theta", s.theta)?;
    d.set_item("phi", s.phi)?;
    d.set_item("T", s.transfer_ratio())?;
    d.set_item("s", s.s.iter().map(|r| r.to_vec()).collect::<Vec<_>>())?;
    Ok(d)
}

#[pyfunction]
fn log_gamma(z: Complex64) -> PyResult<Complex64> {
    lz::complex_log_gamma(z).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (t, params, slope = None))]
fn eigenvalues_exact(t: f64, params: &PySystemParams, slope: Option<f64>) -> Vec<Complex64> {
    let slope = slope.unwrap_or_else(|| params.inner.hamiltonian.slope());
    lz::eigenvalues_exact(t, &params.inner, slope).p.to_vec()
}

#[pyfunction]
#[pyo3(signature = (t, params, slope = None))]
fn eigenvalues_asymptotic(t: f64, params: &PySystemParams, slope: Option<f64>) -> PyResult<Vec<Complex64>> {
    let slope = slope.unwrap_or_else(|| params.inner.hamiltonian.slope());
    Ok(lz::eigenvalues_asymptotic(t, &params.inner, slope)
        .map_err(to_py)?
        .p
        .to_vec())
}

/// `(delta_c, gamma_c)` of the large-time eigenvalue expansion.
#[pyfunction]
fn gamma_c(params: &PySystemParams) -> PyResult<(f64, f64)> {
    lz::gamma_c(&params.inner).map_err(to_py)
}

#[pyfunction]
fn gamma_c_exact(params: &PySystemParams) -> PyResult<f64> {
    lz::gamma_c_exact(&params.inner).map_err(to_py)
}

/// Rates of an isotropic bath with coupling `g` and occupation `n_bar`,
/// attached to `delta` and `omega0`.
#[pyfunction]
#[pyo3(signature = (g, n_bar, delta = 0.0, omega0 = 0.0))]
fn thermal_bath(g: f64, n_bar: f64, delta: f64, omega0: f64) -> PyResult<PySystemParams> {
    Ok(PySystemParams {
        inner: model::SystemParams {
            hamiltonian: HamiltonianParams::new(delta, omega0),
            dissipator: model::thermal_bath(g, n_bar).map_err(to_py)?,
            relaxation_mode: RelaxationMode::Homogeneous,
        },
    })
}

/// Transform of uniformly sampled values starting at `t0`: `(omega, values)`.
#[pyfunction]
#[pyo3(signature = (t0, dt, values, window = "hann"))]
fn spectrum(t0: f64, dt: f64, values: Vec<f64>, window: &str) -> PyResult<(Vec<f64>, Vec<Complex64>)> {
    let w: Window = window.parse().map_err(to_py)?;
    let s = spectral::spectrum(t0, dt, &values, w).map_err(to_py)?;
    Ok(s.into_iter().map(|s| (s.omega, s.value)).unzip())
}

#[pyfunction]
fn z_tilde_asymptotic(omega: f64, delta: f64, slope: f64) -> PyResult<Complex64> {
    spectral::z_tilde_asymptotic(omega, delta, slope).map_err(to_py)
}

/// Runs the command line with `args` (without the program name) and
/// returns its exit status.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> i32 {
    py.detach(|| lzb::cli::run(std::iter::once("lz-bloch".to_string()).chain(args)))
}

#[pymodule]
fn lz_bloch(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemParams>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    m.add_function(wrap_pyfunction!(preset_ids, m)?)?;
    m.add_function(wrap_pyfunction!(lz_nu, m)?)?;
    m.add_function(wrap_pyfunction!(transfer_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(s_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(log_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues_exact, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_c, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_c_exact, m)?)?;
    m.add_function(wrap_pyfunction!(thermal_bath, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(z_tilde_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
