use num_complex::Complex64;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use weylherm_py::Simulation;

fn harmonic(n: usize) -> Simulation {
    Simulation::py_new(
        n, "harmonic", 0.0, -8.0, 8.0, 128, "spectral_fourier", "von_neumann", "implicit_midpoint", 0.1, 1e-2, 0.6,
        1e-13,
    )
    .unwrap()
}

#[test]
fn advance_conserves_norm_and_trace() {
    let mut sim = harmonic(12);
    let rows = sim.advance_rows(1.0, 20, false).unwrap();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!((r.l2_norm - rows[0].l2_norm).abs() < 1e-10 * rows[0].l2_norm);
        assert!((r.trace - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }
    assert_eq!(sim.state().time, 1.0);
}

#[test]
fn bad_arguments_raise_value_error() {
    let r = Simulation::py_new(
        8, "cubic", 0.0, -4.0, 4.0, 64, "central4", "von_neumann", "rk4", 0.1, 1e-3, 0.6, 1e-12,
    );
    let err = r.err().expect("unknown potential is rejected");
    pyo3::prepare_freethreaded_python();
    Python::with_gil(|py| {
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        assert!(err.value(py).to_string().contains("cubic"));
    });
}

#[test]
fn advance_returns_dicts_to_python() {
    pyo3::prepare_freethreaded_python();
    Python::with_gil(|py| {
        let sim = Bound::new(py, harmonic(6)).unwrap();
        let rows = sim.call_method1("advance", (0.5, 10)).unwrap();
        let rows: Vec<Bound<'_, PyDict>> = rows.extract().unwrap();
        assert_eq!(rows.len(), 6);
        let t: f64 = rows[5].get_item("t").unwrap().unwrap().extract().unwrap();
        assert_eq!(t, 0.5);
    });
}
