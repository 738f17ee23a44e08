//! Python bindings for the `hydrolfc` load-frequency control toolkit.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hydrolfc::fuzzy::{self, GeneQuad, UniverseScales};
use hydrolfc::harness::{self, ControllerKind, RunArtifacts, Scenario};
use hydrolfc::metrics::{self, MetricReport, SimTrace};
use hydrolfc::optim::{self, Chromosome};
use hydrolfc::plant::{self, SlcLadder, TurbineRating};
use hydrolfc::LfcError;

fn to_py(e: LfcError) -> PyErr {
    match e {
        LfcError::Domain(_) | LfcError::Config(_) => PyValueError::new_err(e.to_string()),
        LfcError::Divergence { .. } => PyRuntimeError::new_err(e.to_string()),
        LfcError::Io { .. } => PyOSError::new_err(e.to_string()),
    }
}

fn parse_scenario(toml: &str, controller: Option<&str>) -> PyResult<Scenario> {
    let sc = Scenario::from_toml(toml).map_err(to_py)?;
    match controller {
        Some(k) => Ok(sc.with_controller(k.parse::<ControllerKind>().map_err(to_py)?)),
        None => Ok(sc),
    }
}

fn report_dict<'py>(py: Python<'py>, r: &MetricReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("overshoot", r.overshoot)?;
    d.set_item("undershoot", r.undershoot)?;
    d.set_item("settling_time", r.settling_time)?;
    d.set_item("settled", r.settled)?;
    d.set_item("sse", r.sse)?;
    d.set_item("iae", r.iae)?;
    d.set_item("ise", r.ise)?;
    d.set_item("itae", r.itae)?;
    Ok(d)
}

fn trace_dict<'py>(py: Python<'py>, tr: &SimTrace) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", &tr.t)?;
    d.set_item("f_err_hz", &tr.f_err)?;
    d.set_item("p_gen_kw", &tr.p_gen)?;
    d.set_item("p_load_kw", &tr.p_load)?;
    d.set_item("p_slc_kw", &tr.p_slc)?;
    Ok(d)
}

fn artifacts_dict<'py>(py: Python<'py>, a: &RunArtifacts) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("controller", a.kind.name())?;
    d.set_item("trace", trace_dict(py, &a.trace)?)?;
    match &a.report {
        Some(r) => d.set_item("report", report_dict(py, r)?)?,
        None => d.set_item("report", py.None())?,
    }
    d.set_item("efficiency", a.efficiency)?;
    d.set_item("diverged", a.divergence.is_some())?;
    d.set_item("best_genes", a.manifest.best_genes.map(|g| g.to_vec()))?;
    d.set_item("best_j", a.manifest.best_j)?;
    if let Some(opt) = &a.optimizer {
        d.set_item("ga_log", opt.outcome.log_csv())?;
    }
    Ok(d)
}

/// Rated hydraulic power (kW) of a turbine.
#[pyfunction]
#[pyo3(signature = (flow_m3s, head_m, efficiency))]
fn turbine_power(flow_m3s: f64, head_m: f64, efficiency: f64) -> PyResult<f64> {
    plant::turbine_power(&TurbineRating {
        flow_m3s,
        head_m,
        efficiency,
    })
    .map_err(to_py)
}

/// Nearest dump-load ladder setting for a surplus: `(code, absorbed_kw)`.
#[pyfunction]
#[pyo3(signature = (surplus_kw, step_kw = 1.75, n_bits = 8))]
fn slc_quantize(surplus_kw: f64, step_kw: f64, n_bits: u32) -> PyResult<(u8, f64)> {
    plant::slc_quantize(surplus_kw, &SlcLadder { step_kw, n_bits }).map_err(to_py)
}

/// Breakpoints `(b1, b2, b3, b4)` decoded from four genes.
#[pyfunction]
fn decode_quad(genes: [f64; 4], scale: f64) -> PyResult<(f64, f64, f64, f64)> {
    let q = GeneQuad::new(genes).map_err(to_py)?;
    let b = fuzzy::decode_quad(&q, scale).map_err(to_py)?;
    Ok((b.b1, b.b2, b.b3, b.b4))
}

/// Metric report of a frequency-error signal sampled on a uniform grid.
#[pyfunction]
#[pyo3(signature = (t, f_err, settle_band = 0.05, tail_fraction = 0.1))]
fn compute_report<'py>(
    py: Python<'py>,
    t: Vec<f64>,
    f_err: Vec<f64>,
    settle_band: f64,
    tail_fraction: f64,
) -> PyResult<Bound<'py, PyDict>> {
    if t.len() != f_err.len() {
        return Err(PyValueError::new_err("t and f_err must have the same length"));
    }
    let r = metrics::compute_report(&SimTrace::from_error(t, f_err), settle_band, tail_fraction).map_err(to_py)?;
    report_dict(py, &r)
}

/// Reference load-step scenario as TOML text.
#[pyfunction]
#[pyo3(signature = (delta_kw = 50.0))]
fn default_scenario(delta_kw: f64) -> String {
    Scenario::default_load_step(delta_kw).to_toml()
}

/// Runs a scenario (optionally overriding its controller) and returns
/// the trace, report and optimizer results as a dict.
#[pyfunction]
#[pyo3(signature = (toml, controller = None))]
fn run_scenario<'py>(py: Python<'py>, toml: &str, controller: Option<&str>) -> PyResult<Bound<'py, PyDict>> {
    let sc = parse_scenario(toml, controller)?;
    let a = py.detach(|| harness::run_scenario(&sc)).map_err(to_py)?;
    artifacts_dict(py, &a)
}

/// Runs several controllers on one scenario; returns the comparison CSV.
#[pyfunction]
fn compare(py: Python<'_>, toml: &str, controllers: Vec<String>) -> PyResult<String> {
    let sc = parse_scenario(toml, None)?;
    let kinds = controllers
        .iter()
        .map(|c| c.parse::<ControllerKind>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(to_py)?;
    let cmp = py.detach(|| harness::run_comparison(&sc, &kinds)).map_err(to_py)?;
    match cmp.table {
        Some(t) => Ok(t.to_csv()),
        None => Err(PyRuntimeError::new_err(cmp.text())),
    }
}

/// Objective J (integrated squared frequency error) of the fuzzy PD
/// controller built from twelve genes.
#[pyfunction]
fn fitness(py: Python<'_>, toml: &str, genes: [f64; 12]) -> PyResult<f64> {
    let sc = parse_scenario(toml, None)?;
    let c = Chromosome::new(genes).map_err(to_py)?;
    py.detach(|| optim::fitness(&c, &sc)).map_err(to_py)
}

/// Fuzzy inference system decoded from twelve genes.
#[pyclass(name = "FuzzySystem", frozen)]
struct PyFuzzySystem {
    inner: fuzzy::FuzzySystem,
}

#[pymethods]
impl PyFuzzySystem {
    #[new]
    #[pyo3(signature = (genes, e_scale = 0.032, ec_scale = 100.0, u_scale = 0.032))]
    fn new(genes: [f64; 12], e_scale: f64, ec_scale: f64, u_scale: f64) -> PyResult<Self> {
        let scales = UniverseScales {
            e: e_scale,
            ec: ec_scale,
            u: u_scale,
        };
        Ok(PyFuzzySystem {
            inner: fuzzy::FuzzySystem::from_genes(&genes, &scales).map_err(to_py)?,
        })
    }

    fn infer(&self, e: f64, ec: f64) -> PyResult<f64> {
        self.inner.infer(e, ec).map_err(to_py)
    }

    /// Normalized 7x7 rule weights, rows indexed by the error term.
    fn rule_weights(&self, e: f64, ec: f64) -> PyResult<Vec<Vec<f64>>> {
        let w = self.inner.rule_weights(e, ec).map_err(to_py)?;
        Ok(w.iter().map(|r| r.to_vec()).collect())
    }

    /// Triangle centers of the e, ec and u families.
    fn centers(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        (
            self.inner.e.centers().to_vec(),
            self.inner.ec.centers().to_vec(),
            self.inner.u.centers().to_vec(),
        )
    }
}

#[pymodule(name = "hydrolfc")]
fn hydrolfc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(turbine_power, m)?)?;
    m.add_function(wrap_pyfunction!(slc_quantize, m)?)?;
    m.add_function(wrap_pyfunction!(decode_quad, m)?)?;
    m.add_function(wrap_pyfunction!(compute_report, m)?)?;
    m.add_function(wrap_pyfunction!(default_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(fitness, m)?)?;
    m.add_class::<PyFuzzySystem>()?;
    Ok(())
}
