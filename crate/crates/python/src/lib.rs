//! Python bindings for `weylherm`.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use weylherm::config::{Experiment, ExperimentConfig};
use weylherm::diagnostics::{self, DiagnosticsRow};
use weylherm::evolution::{run, EvolutionConfig, HermiteState, HermiteSystem, InitialData, Model, TimeScheme};
use weylherm::grid::{DerivativeScheme, Grid, GridSpec};
use weylherm::potential::PotentialModel;
use weylherm::snapshot::Snapshot;

fn py_err(e: weylherm::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_potential(kind: &str, chi: f64) -> PyResult<PotentialModel> {
    match kind {
        "harmonic" => Ok(PotentialModel::Harmonic),
        "quartic" => PotentialModel::quartic(chi).map_err(py_err),
        other => Err(PyValueError::new_err(format!("unknown potential {other:?}"))),
    }
}

/// Orthonormal Hermite functions Φ_0..Φ_n at `y`.
#[pyfunction]
fn hermite_functions(n: usize, y: f64) -> PyResult<Vec<f64>> {
    weylherm::hermite::phi_all(n, y).map_err(py_err)
}

/// Gauss–Hermite nodes and weights for the weight e^{-y²}.
#[pyfunction]
fn gauss_hermite(q: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let rule = weylherm::hermite::gauss_hermite_rule(q).map_err(py_err)?;
    Ok((rule.nodes, rule.weights))
}

#[pyfunction]
fn order_of_accuracy(e1: f64, n1: f64, e2: f64, n2: f64) -> PyResult<f64> {
    diagnostics::order_of_accuracy(e1, n1, e2, n2).map_err(py_err)
}

/// `(tail, bound)` of the projection tail certificate.
#[pyfunction]
fn tail_certificate(coeffs: Vec<Complex64>, n: usize, p: u32) -> PyResult<(f64, f64)> {
    let cert = diagnostics::projection_tail_certificate(&coeffs, n, p).map_err(py_err)?;
    Ok((cert.tail, cert.bound))
}

/// Header fields and modes of a snapshot file.
#[pyfunction]
fn load_snapshot<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyDict>> {
    let snap = Snapshot::load(&path).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("x_min", snap.x_min)?;
    d.set_item("x_max", snap.x_max)?;
    d.set_item("hbar", snap.hbar)?;
    d.set_item("model", snap.model.name())?;
    d.set_item("time", snap.state.time)?;
    d.set_item("modes", snap.state.modes)?;
    Ok(d)
}

/// Runs `simulate`, `converge`, `hbar_sweep` or `periodicity` from a config
/// file; returns the summary as a JSON string.
#[pyfunction]
#[pyo3(signature = (kind, config, out=None))]
fn run_experiment(kind: &str, config: PathBuf, out: Option<PathBuf>) -> PyResult<String> {
    let exp = Experiment::parse(kind).ok_or_else(|| PyValueError::new_err(format!("unknown experiment {kind:?}")))?;
    let mut cfg = ExperimentConfig::load(&config, Some(exp)).map_err(py_err)?;
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    let art = weylherm::experiments::run_experiment(&cfg).map_err(py_err)?;
    Ok(art.summary.to_string())
}

fn row_dict<'py>(py: Python<'py>, r: &DiagnosticsRow) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", r.t)?;
    d.set_item("l2_norm", r.l2_norm)?;
    d.set_item("trace", r.trace)?;
    d.set_item("parity_residual", r.parity_residual)?;
    d.set_item("boundary_mass", r.boundary_mass)?;
    if !r.nm.is_empty() {
        d.set_item("nm", r.nm.clone())?;
    }
    Ok(d)
}

/// A truncated Hermite system together with its current state.
#[pyclass(module = "weylherm_py")]
pub struct Simulation {
    system: HermiteSystem,
    state: HermiteState,
    config: EvolutionConfig,
}

impl Simulation {
    pub fn state(&self) -> &HermiteState {
        &self.state
    }

    fn grid(&self) -> &Grid {
        self.system.grid()
    }

    /// Marches by `duration`, collecting diagnostics every `observe_every` steps.
    pub fn advance_rows(&mut self, duration: f64, observe_every: usize, with_nm: bool) -> weylherm::Result<Vec<DiagnosticsRow>> {
        let mut cfg = self.config;
        cfg.t_final = self.state.time + duration;
        let grid = self.system.grid().clone();
        let mut rows = Vec::new();
        let mut failure = None;
        let fin = run(&self.system, self.state.clone(), &cfg, observe_every, |s| {
            match DiagnosticsRow::observe(s, &grid, with_nm) {
                Ok(r) => rows.push(r),
                Err(e) => failure = failure.take().or(Some(e)),
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        self.state = fin;
        Ok(rows)
    }
}

#[pymethods]
impl Simulation {
    #[new]
    #[pyo3(signature = (
        n_modes,
        potential="quartic",
        chi=0.5,
        x_min=-4.0,
        x_max=4.0,
        nx=256,
        grid_scheme="spectral_fourier",
        model="von_neumann",
        time_scheme="rk4",
        hbar=0.1,
        dt=1e-3,
        sigma_x=0.6,
        solver_tol=1e-12,
    ))]
    #[allow(clippy::too_many_arguments)]
    pub fn py_new(
        n_modes: usize,
        potential: &str,
        chi: f64,
        x_min: f64,
        x_max: f64,
        nx: usize,
        grid_scheme: &str,
        model: &str,
        time_scheme: &str,
        hbar: f64,
        dt: f64,
        sigma_x: f64,
        solver_tol: f64,
    ) -> PyResult<Self> {
        let scheme = DerivativeScheme::parse(grid_scheme)
            .ok_or_else(|| PyValueError::new_err(format!("unknown grid scheme {grid_scheme:?}")))?;
        let model = Model::parse(model).ok_or_else(|| PyValueError::new_err(format!("unknown model {model:?}")))?;
        let time_scheme = TimeScheme::parse(time_scheme)
            .ok_or_else(|| PyValueError::new_err(format!("unknown time scheme {time_scheme:?}")))?;
        let grid = Grid::new(GridSpec::new(x_min, x_max, nx, scheme).map_err(py_err)?).map_err(py_err)?;
        let config = EvolutionConfig {
            model,
            scheme: time_scheme,
            dt,
            hbar,
            solver_tol,
            ..Default::default()
        };
        config.validate().map_err(py_err)?;
        let state = InitialData::CoherentState { sigma_x }.build(&grid, n_modes).map_err(py_err)?;
        let system =
            HermiteSystem::new(grid, parse_potential(potential, chi)?, model, hbar, n_modes).map_err(py_err)?;
        Ok(Self { system, state, config })
    }

    #[getter]
    fn time(&self) -> f64 {
        self.state.time
    }

    #[getter]
    fn n_modes(&self) -> usize {
        self.state.n_modes()
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.grid().nodes().to_vec()
    }

    /// Largest rk4 step the stability estimate allows (before the safety factor).
    fn stable_dt(&self) -> f64 {
        self.system.stable_dt_estimate()
    }

    /// Advances by `duration`; returns one diagnostics dict per observation.
    #[pyo3(signature = (duration, observe_every=100, with_nm=false))]
    fn advance<'py>(
        &mut self,
        py: Python<'py>,
        duration: f64,
        observe_every: usize,
        with_nm: bool,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let rows = self.advance_rows(duration, observe_every, with_nm).map_err(py_err)?;
        rows.iter().map(|r| row_dict(py, r)).collect()
    }

    /// `modes[k][j] = R_k(x_j)`.
    fn modes(&self) -> Vec<Vec<Complex64>> {
        self.state.modes.clone()
    }

    fn l2_norm(&self) -> PyResult<f64> {
        diagnostics::l2_norm(&self.state, self.grid()).map_err(py_err)
    }

    fn trace(&self) -> PyResult<Complex64> {
        diagnostics::trace(&self.state, self.grid()).map_err(py_err)
    }

    fn parity_residual(&self) -> PyResult<f64> {
        diagnostics::parity_residual(&self.state, self.grid()).map_err(py_err)
    }

    fn boundary_mass(&self) -> PyResult<f64> {
        diagnostics::boundary_mass(&self.state, self.grid()).map_err(py_err)
    }

    fn nm(&self, m: u32) -> PyResult<f64> {
        diagnostics::nm_functional(&self.state, self.grid(), m).map_err(py_err)
    }

    /// `W(x_j, ξ_i)` as `values[i][j]`.
    fn wigner(&self, xi: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        Ok(diagnostics::wigner_slice(&self.state, &xi).map_err(py_err)?.values)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        let spec = self.grid().spec();
        Snapshot {
            x_min: spec.x_min,
            x_max: spec.x_max,
            hbar: self.config.hbar,
            model: self.config.model,
            state: self.state.clone(),
        }
        .save(&path)
        .map_err(py_err)
    }
}

#[pymodule]
fn weylherm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(hermite_functions, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_hermite, m)?)?;
    m.add_function(wrap_pyfunction!(order_of_accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(tail_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(load_snapshot, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_class::<Simulation>()?;
    Ok(())
}
