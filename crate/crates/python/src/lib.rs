//! Python bindings for the `gridsec` simulator.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict};

use gridsec::config::{default_scenario, parse_config, ScenarioConfig, FIELD_NAMES};
use gridsec::cost::{self, CostModel};
use gridsec::error::Error;
use gridsec::matrix::ComplexMatrix;
use gridsec::outage::{self, Mode};
use gridsec::precoding;
use gridsec::sweep::{self, ModeSelection, SweepSpec};

fn to_py_err(err: Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn matrix_from_rows(rows: Vec<Vec<Complex64>>) -> PyResult<ComplexMatrix> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(PyValueError::new_err("ragged matrix rows"));
    }
    Ok(ComplexMatrix::from_fn(n_rows, n_cols, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn value_text(value: &Bound<'_, PyAny>) -> PyResult<String> {
    if value.is_instance_of::<PyBool>() {
        Ok(if value.extract::<bool>()? { "true" } else { "false" }.to_string())
    } else {
        Ok(value.str()?.to_string())
    }
}

/// Scenario parameters. Keyword arguments override the reference defaults.
#[pyclass(name = "Scenario", module = "pygridsec", from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: ScenarioConfig,
}

#[pymethods]
impl PyScenario {
    #[new]
    #[pyo3(signature = (**overrides))]
    fn new(overrides: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut cfg = default_scenario();
        if let Some(overrides) = overrides {
            for (key, value) in overrides.iter() {
                let key: String = key.extract()?;
                cfg.set(&key, &value_text(&value)?).map_err(to_py_err)?;
            }
        }
        cfg.validate().map_err(to_py_err)?;
        Ok(Self { inner: cfg })
    }

    #[staticmethod]
    fn from_file(path: PathBuf) -> PyResult<Self> {
        parse_config(path).map(|inner| Self { inner }).map_err(to_py_err)
    }

    /// Copy with some fields replaced.
    #[pyo3(signature = (**overrides))]
    fn replace(&self, overrides: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut cfg = self.inner.clone();
        if let Some(overrides) = overrides {
            for (key, value) in overrides.iter() {
                let key: String = key.extract()?;
                cfg.set(&key, &value_text(&value)?).map_err(to_py_err)?;
            }
        }
        cfg.validate().map_err(to_py_err)?;
        Ok(Self { inner: cfg })
    }

    fn get(&self, key: &str) -> PyResult<String> {
        self.inner
            .get(key)
            .ok_or_else(|| PyValueError::new_err(format!("unknown key `{key}`")))
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        let c = &self.inner;
        for key in FIELD_NAMES {
            match *key {
                "n_a" => d.set_item(key, c.n_a)?,
                "n_b" => d.set_item(key, c.n_b)?,
                "n_e" => d.set_item(key, c.n_e)?,
                "n_g" => d.set_item(key, c.n_g)?,
                "n_j" => d.set_item(key, c.n_j)?,
                "s_ab" => d.set_item(key, c.s_ab)?,
                "s_bg" => d.set_item(key, c.s_bg)?,
                "k_blocks" => d.set_item(key, c.k_blocks)?,
                "m_gateways" => d.set_item(key, c.m_gateways)?,
                "n_consumers" => d.set_item(key, c.n_consumers)?,
                "seed" => d.set_item(key, c.seed)?,
                "trials" => d.set_item(key, c.trials)?,
                "truncate_demand" => d.set_item(key, c.truncate_demand)?,
                "gateway_policy" => d.set_item(key, c.gateway_policy.to_string())?,
                other => {
                    let v: f64 = c.get(other).unwrap_or_default().parse().unwrap_or(f64::NAN);
                    d.set_item(key, v)?
                }
            }
        }
        Ok(d)
    }

    fn to_file_string(&self) -> String {
        self.inner.to_file_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(n_a={}, n_j={}, m_gateways={}, rate_target={}, theta={}, trials={}, seed={})",
            self.inner.n_a,
            self.inner.n_j,
            self.inner.m_gateways,
            self.inner.rate_target,
            self.inner.theta,
            self.inner.trials,
            self.inner.seed
        )
    }
}

#[pyclass(name = "OutageEstimate", module = "pygridsec", frozen, get_all)]
struct PyOutageEstimate {
    mode: String,
    p_outage: f64,
    p_sec_block: f64,
    unsecured_fraction: f64,
    trials: usize,
    stderr_outage: f64,
    stderr_sec: f64,
}

impl From<outage::OutageEstimate> for PyOutageEstimate {
    fn from(e: outage::OutageEstimate) -> Self {
        Self {
            mode: e.mode.as_str().to_string(),
            p_outage: e.p_outage,
            p_sec_block: e.p_sec_block,
            unsecured_fraction: e.unsecured_fraction,
            trials: e.trials,
            stderr_outage: e.stderr_outage,
            stderr_sec: e.stderr_sec,
        }
    }
}

#[pymethods]
impl PyOutageEstimate {
    fn __repr__(&self) -> String {
        format!(
            "OutageEstimate(mode='{}', p_outage={}, p_sec_block={}, trials={})",
            self.mode, self.p_outage, self.p_sec_block, self.trials
        )
    }
}

#[pyclass(name = "CostReport", module = "pygridsec", frozen, get_all)]
struct PyCostReport {
    per_consumer_cost: f64,
    expected_loss: f64,
    n_consumers: usize,
    p_outage: f64,
}

#[pyclass(name = "LinkDesign", module = "pygridsec", frozen, get_all)]
struct PyLinkDesign {
    whitener: Vec<Vec<Complex64>>,
    data_precoder: Vec<Vec<Complex64>>,
    receive_filter: Vec<Vec<Complex64>>,
    an_precoder: Vec<Vec<Complex64>>,
    singular_values: Vec<f64>,
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    match mode {
        "selection" => Ok(Mode::Selection),
        "analytic" => Ok(Mode::Analytic),
        other => Err(PyValueError::new_err(format!(
            "mode must be 'selection' or 'analytic', got '{other}'"
        ))),
    }
}

/// Monte Carlo outage and secrecy estimate for one scenario.
#[pyfunction]
#[pyo3(signature = (scenario, mode = "selection"))]
fn estimate(py: Python<'_>, scenario: &PyScenario, mode: &str) -> PyResult<PyOutageEstimate> {
    let mode = parse_mode(mode)?;
    let cfg = scenario.inner.clone();
    let tally = py.detach(|| outage::run_trials(&cfg)).map_err(to_py_err)?;
    Ok(tally.estimate(mode).into())
}

/// Utility loss for `n_consumers` reports each lost with probability `p_outage`.
#[pyfunction]
fn expected_loss(scenario: &PyScenario, p_outage: f64) -> PyResult<PyCostReport> {
    let model = CostModel::from_config(&scenario.inner);
    let r = cost::expected_loss(&model, scenario.inner.n_consumers, p_outage).map_err(to_py_err)?;
    Ok(PyCostReport {
        per_consumer_cost: r.per_consumer_cost,
        expected_loss: r.expected_loss,
        n_consumers: r.n_consumers,
        p_outage: r.p_outage,
    })
}

#[pyfunction]
fn consumer_cost(scenario: &PyScenario) -> f64 {
    cost::consumer_cost(&CostModel::from_config(&scenario.inner))
}

#[pyfunction]
fn consumer_cost_quadrature(scenario: &PyScenario) -> f64 {
    cost::consumer_cost_quadrature(&CostModel::from_config(&scenario.inner))
}

#[pyfunction]
fn unsecured_fraction(p_block: f64, k: usize) -> PyResult<f64> {
    if k == 0 || !(0.0..=1.0).contains(&p_block) {
        return Err(PyValueError::new_err("need 0 <= p_block <= 1 and k >= 1"));
    }
    Ok(outage::unsecured_fraction_combiner(p_block, k))
}

/// Null-space jamming precoder for a jammer -> eavesdropper channel.
#[pyfunction]
fn jammer_precoder(h_je: Vec<Vec<Complex64>>) -> PyResult<Vec<Vec<Complex64>>> {
    let h = matrix_from_rows(h_je)?;
    let q = precoding::jammer_precoder(&h, h.ncols(), h.nrows()).map_err(to_py_err)?;
    Ok(matrix_to_rows(&q))
}

/// Whitened SVD transceiver and artificial-noise precoder for one link.
#[pyfunction]
fn design_link(h: Vec<Vec<Complex64>>, w: Vec<Vec<Complex64>>, streams: usize) -> PyResult<PyLinkDesign> {
    let h = matrix_from_rows(h)?;
    let w = matrix_from_rows(w)?;
    let d = precoding::design_link(&h, &w, streams).map_err(to_py_err)?;
    Ok(PyLinkDesign {
        whitener: matrix_to_rows(&d.whitener),
        data_precoder: matrix_to_rows(&d.data_precoder),
        receive_filter: matrix_to_rows(&d.receive_filter),
        an_precoder: matrix_to_rows(&d.an_precoder),
        singular_values: d.singular_values,
    })
}

/// Runs a sweep and returns its CSV text.
#[pyfunction]
#[pyo3(signature = (scenario, axis, values, mode = "selection"))]
fn sweep_csv(py: Python<'_>, scenario: &PyScenario, axis: &str, values: Vec<f64>, mode: &str) -> PyResult<String> {
    let spec = SweepSpec {
        axis: axis.parse().map_err(to_py_err)?,
        values,
        base: scenario.inner.clone(),
        modes: mode.parse::<ModeSelection>().map_err(to_py_err)?,
    };
    let report = py.detach(|| sweep::run_sweep(&spec));
    let mut buf = Vec::new();
    sweep::write_csv(&report, &mut buf).map_err(to_py_err)?;
    String::from_utf8(buf).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn pygridsec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyOutageEstimate>()?;
    m.add_class::<PyCostReport>()?;
    m.add_class::<PyLinkDesign>()?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(expected_loss, m)?)?;
    m.add_function(wrap_pyfunction!(consumer_cost, m)?)?;
    m.add_function(wrap_pyfunction!(consumer_cost_quadrature, m)?)?;
    m.add_function(wrap_pyfunction!(unsecured_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(jammer_precoder, m)?)?;
    m.add_function(wrap_pyfunction!(design_link, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    m.add("CSV_HEADER", sweep::CSV_HEADER.join(","))?;
    Ok(())
}
