//! Python bindings: `import pyfrogpr`.
//!
//! Signals and spectra cross the boundary as lists of Python `complex`,
//! measurements as a `Measurements` object keyed by `(k, m)`.

use frogpr::ambiguity::equivalent_up_to_group;
use frogpr::analytic::{generic_analytic, is_analytic_default, make_analytic, RealSignal};
use frogpr::frog::{self, FrogMeasurements, MeasurementIndexPlan};
use frogpr::recovery::{self, RecoveryConfig};
use frogpr::selftest::{run_all, SelftestOptions};
use frogpr::{io, Complex64, Spectrum, TimeSignal};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

create_exception!(pyfrogpr, FrogError, PyValueError);

fn err(e: frogpr::Error) -> PyErr {
    FrogError::new_err(e.to_string())
}

fn signal(values: Vec<Complex64>) -> PyResult<TimeSignal> {
    TimeSignal::new(values).map_err(err)
}

#[pyclass(name = "FrogParams", frozen)]
struct PyFrogParams(frog::FrogParams);

#[pymethods]
impl PyFrogParams {
    #[new]
    fn new(n: usize, l: usize) -> PyResult<Self> {
        frog::FrogParams::new(n, l).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn l(&self) -> usize {
        self.0.l()
    }

    /// Raises `FrogError` when the configuration is outside the recoverable
    /// class (odd `L`, too few delays, ...).
    fn check_recoverable(&self) -> PyResult<()> {
        self.0.check_recoverable().map_err(err)
    }

    fn full_grid(&self) -> Vec<(usize, usize)> {
        self.0.full_grid()
    }

    fn __repr__(&self) -> String {
        format!("FrogParams(n={}, l={})", self.0.n(), self.0.l())
    }
}

#[pyclass(name = "Plan", frozen)]
struct PyPlan(MeasurementIndexPlan);

#[pymethods]
impl PyPlan {
    fn entries(&self) -> Vec<(usize, usize)> {
        self.0.entries()
    }

    #[getter]
    fn i2(&self) -> Vec<usize> {
        self.0.i2.to_vec()
    }

    #[getter]
    fn i3(&self) -> usize {
        self.0.i3
    }

    fn row(&self, k: usize) -> PyResult<[usize; 3]> {
        let half = self.0.params.n() / 2;
        if !(4..=half).contains(&k) {
            return Err(PyValueError::new_err(format!(
                "row needs 4 <= k <= {half}, got {k}"
            )));
        }
        Ok(self.0.row(k))
    }

    fn __len__(&self) -> usize {
        self.0.entries().len()
    }
}

#[pyclass(name = "Measurements")]
struct PyMeasurements(FrogMeasurements);

#[pymethods]
impl PyMeasurements {
    #[getter]
    fn params(&self) -> PyFrogParams {
        PyFrogParams(*self.0.params())
    }

    fn get(&self, k: usize, m: usize) -> Option<f64> {
        self.0.get(k, m)
    }

    fn set(&mut self, k: usize, m: usize, value: f64) -> PyResult<()> {
        self.0.insert(k, m, value).map_err(err)
    }

    fn items(&self) -> Vec<((usize, usize), f64)> {
        self.0.iter().collect()
    }

    fn to_json(&self) -> PyResult<String> {
        io::measurements_to_json(&self.0).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        io::measurements_from_json(text).map(Self).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        let p = self.0.params();
        format!(
            "Measurements(n={}, l={}, entries={})",
            p.n(),
            p.l(),
            self.0.len()
        )
    }
}

#[pyfunction]
fn dft(values: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    Ok(frogpr::spectral::dft(&signal(values)?).as_slice().to_vec())
}

#[pyfunction]
fn idft(coeffs: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    let s = Spectrum::new(coeffs).map_err(err)?;
    Ok(frogpr::spectral::idft(&s).as_slice().to_vec())
}

#[pyfunction(name = "make_analytic")]
fn py_make_analytic(x: Vec<f64>) -> PyResult<Vec<Complex64>> {
    let x = RealSignal::new(x).map_err(err)?;
    Ok(make_analytic(&x).as_slice().to_vec())
}

#[pyfunction(name = "is_analytic")]
fn py_is_analytic(values: Vec<Complex64>) -> PyResult<(bool, f64)> {
    let r = is_analytic_default(&frogpr::spectral::dft(&signal(values)?));
    Ok((r.is_analytic, r.max_violation))
}

#[pyfunction(name = "generic_analytic")]
#[pyo3(signature = (n, seed = 0))]
fn py_generic_analytic(n: usize, seed: u64) -> PyResult<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(generic_analytic(n, &mut rng)
        .map_err(err)?
        .as_slice()
        .to_vec())
}

#[pyfunction]
fn plan_indices(params: &PyFrogParams) -> PyResult<PyPlan> {
    frog::plan_indices(&params.0).map(PyPlan).map_err(err)
}

/// FROG measurements of `values`; the full grid unless `indices` is given.
#[pyfunction]
#[pyo3(signature = (values, params, indices = None))]
fn measure(
    values: Vec<Complex64>,
    params: &PyFrogParams,
    indices: Option<Vec<(usize, usize)>>,
) -> PyResult<PyMeasurements> {
    let z = signal(values)?;
    frog::frog_measurements_time(&z, &params.0, indices.as_deref())
        .map(PyMeasurements)
        .map_err(err)
}

/// Recovers a signal from planned measurements. Returns a dict with
/// `signal`, `spectrum`, `sign_branch` and `verification_residual`.
#[pyfunction]
#[pyo3(signature = (meas, plan, residual_tol = 1e-6))]
fn recover<'py>(
    py: Python<'py>,
    meas: &PyMeasurements,
    plan: &PyPlan,
    residual_tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = RecoveryConfig {
        residual_tol,
        ..RecoveryConfig::default()
    };
    let out = py
        .detach(|| recovery::recover(&meas.0, &plan.0, &cfg))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("signal", out.signal.as_slice().to_vec())?;
    d.set_item("spectrum", out.spectrum.as_slice().to_vec())?;
    d.set_item("sign_branch", out.sign_branch)?;
    d.set_item("verification_residual", out.verification_residual)?;
    Ok(d)
}

/// Whether `a` and `b` agree up to sign, integer shift and time-reversed
/// conjugation; returns `(equivalent, residual)`.
#[pyfunction]
#[pyo3(signature = (a, b, tol = 1e-6))]
fn equivalent(a: Vec<Complex64>, b: Vec<Complex64>, tol: f64) -> PyResult<(bool, f64)> {
    let r = equivalent_up_to_group(&signal(a)?, &signal(b)?, tol).map_err(err)?;
    Ok((r.equivalent, r.residual))
}

/// Runs the acceptance checks; one `(id, passed, detail)` per criterion.
#[pyfunction]
#[pyo3(signature = (quick = true))]
fn selftest(py: Python<'_>, quick: bool) -> Vec<(u8, bool, String)> {
    let opts = SelftestOptions {
        quick,
        perturbation: None,
    };
    py.detach(|| run_all(&opts))
        .into_iter()
        .map(|c| (c.id, c.passed, c.detail))
        .collect()
}

#[pymodule]
fn pyfrogpr(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FrogError", m.py().get_type::<FrogError>())?;
    m.add_class::<PyFrogParams>()?;
    m.add_class::<PyPlan>()?;
    m.add_class::<PyMeasurements>()?;
    m.add_function(wrap_pyfunction!(dft, m)?)?;
    m.add_function(wrap_pyfunction!(idft, m)?)?;
    m.add_function(wrap_pyfunction!(py_make_analytic, m)?)?;
    m.add_function(wrap_pyfunction!(py_is_analytic, m)?)?;
    m.add_function(wrap_pyfunction!(py_generic_analytic, m)?)?;
    m.add_function(wrap_pyfunction!(plan_indices, m)?)?;
    m.add_function(wrap_pyfunction!(measure, m)?)?;
    m.add_function(wrap_pyfunction!(recover, m)?)?;
    m.add_function(wrap_pyfunction!(equivalent, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
