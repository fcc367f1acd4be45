//! Python bindings.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use thinout_core::bench::{self, CircleSpec};
use thinout_core::pipeline::{self, FileFormat};
use thinout_core::{self as core, Algorithm, NormMode, ThinError, ThinOptions};

fn to_py(e: ThinError) -> PyErr {
    match e {
        ThinError::Io(e) => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr>(value: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| PyValueError::new_err(e.to_string()))
}

fn rows(points: &[core::Point]) -> Vec<Vec<f64>> {
    points.iter().map(|p| p.coords().to_vec()).collect()
}

#[pyclass(name = "Tolerance", module = "thinout", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTolerance(core::Tolerance);

#[pymethods]
impl PyTolerance {
    #[new]
    fn new(eps: Vec<f64>) -> PyResult<Self> {
        core::Tolerance::new(eps).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn uniform(value: f64, dim: usize) -> PyResult<Self> {
        core::Tolerance::uniform(value, dim)
            .map(Self)
            .map_err(to_py)
    }

    #[getter]
    fn eps(&self) -> Vec<f64> {
        self.0.eps().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn scaled(&self, factor: f64) -> PyResult<Self> {
        self.0.scaled(factor).map(Self).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.0.dim()
    }

    fn __repr__(&self) -> String {
        format!("Tolerance({:?})", self.0.eps())
    }
}

#[pyclass(name = "PointSet", module = "thinout", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPointSet(core::PointSet);

#[pymethods]
impl PyPointSet {
    /// `tolerance` is a Tolerance, a list of floats, or one float for every coordinate.
    #[new]
    fn new(points: Vec<Vec<f64>>, tolerance: &Bound<'_, PyAny>) -> PyResult<Self> {
        let dim = points.first().map_or(0, Vec::len);
        let tol = if let Ok(t) = tolerance.cast::<PyTolerance>() {
            t.get().0.clone()
        } else if let Ok(v) = tolerance.extract::<f64>() {
            core::Tolerance::uniform(v, dim.max(1)).map_err(to_py)?
        } else {
            core::Tolerance::new(tolerance.extract::<Vec<f64>>()?).map_err(to_py)?
        };
        let points = points.into_iter().map(core::Point::new).collect();
        core::PointSet::new(points, tol).map(Self).map_err(to_py)
    }

    #[getter]
    fn points(&self) -> Vec<Vec<f64>> {
        rows(self.0.points())
    }

    #[getter]
    fn tolerance(&self) -> PyTolerance {
        PyTolerance(self.0.tolerance().clone())
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "PointSet(len={}, eps={:?})",
            self.0.len(),
            self.0.tolerance().eps()
        )
    }
}

#[pyclass(name = "ThinningResult", module = "thinout", frozen)]
struct PyThinningResult {
    result: core::ThinningResult,
    trace: Option<Vec<Vec<Vec<usize>>>>,
}

impl PyThinningResult {
    fn plain(result: core::ThinningResult) -> Self {
        PyThinningResult {
            result,
            trace: None,
        }
    }

    fn traced(result: core::ThinningResult, trace: Vec<core::Partition>) -> Self {
        PyThinningResult {
            result,
            trace: Some(
                trace
                    .into_iter()
                    .map(core::Partition::into_subsets)
                    .collect(),
            ),
        }
    }
}

#[pymethods]
impl PyThinningResult {
    #[getter]
    fn subsets(&self) -> Vec<Vec<usize>> {
        self.result.subsets().to_vec()
    }

    #[getter]
    fn representatives(&self) -> Vec<Vec<f64>> {
        rows(self.result.representatives())
    }

    /// Intermediate partitions, when requested.
    #[getter]
    fn trace(&self) -> Option<Vec<Vec<Vec<usize>>>> {
        self.trace.clone()
    }

    fn __len__(&self) -> usize {
        self.result.len()
    }

    fn __repr__(&self) -> String {
        format!("ThinningResult({} subsets)", self.result.len())
    }
}

#[pyclass(name = "RunOutput", module = "thinout", frozen)]
struct PyRunOutput(pipeline::RunOutput);

#[pymethods]
impl PyRunOutput {
    #[getter]
    fn algorithm(&self) -> &'static str {
        self.0.algorithm.name()
    }

    #[getter]
    fn subsets(&self) -> Vec<Vec<usize>> {
        self.0.subsets.clone()
    }

    #[getter]
    fn representatives(&self) -> Vec<Vec<f64>> {
        rows(&self.0.representatives)
    }

    #[getter]
    fn collapsable(&self) -> Vec<bool> {
        self.0.collapsable.clone()
    }

    #[getter]
    fn wall_ms(&self) -> f64 {
        self.0.stats.wall_ms
    }

    fn to_json(&self) -> PyResult<String> {
        pipeline::render(&self.0, FileFormat::Json).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.0.subsets.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "RunOutput({}, {} subsets)",
            self.0.algorithm,
            self.0.subsets.len()
        )
    }
}

#[pyfunction]
fn weighted_norm_2(v: Vec<f64>, tol: &PyTolerance) -> PyResult<f64> {
    core::weighted_norm_2(&v, &tol.0).map_err(to_py)
}

#[pyfunction]
fn weighted_norm_inf(v: Vec<f64>, tol: &PyTolerance) -> PyResult<f64> {
    core::weighted_norm_inf(&v, &tol.0).map_err(to_py)
}

#[pyfunction]
fn in_neighborhood(r: Vec<f64>, p: Vec<f64>, tol: &PyTolerance) -> PyResult<bool> {
    core::in_neighborhood(&r, &p, &tol.0).map_err(to_py)
}

#[pyfunction]
fn centroid(indices: Vec<usize>, ps: &PyPointSet) -> PyResult<Vec<f64>> {
    core::centroid(&indices, &ps.0)
        .map(core::Point::into_inner)
        .map_err(to_py)
}

#[pyfunction]
fn is_collapsable(indices: Vec<usize>, ps: &PyPointSet) -> PyResult<bool> {
    core::is_collapsable(&indices, &ps.0).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (indices, ps, mode = "weighted"))]
fn central_ssq(indices: Vec<usize>, ps: &PyPointSet, mode: &str) -> PyResult<f64> {
    core::central_ssq(&indices, &ps.0, parse(mode)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (subsets, ps, mode = "weighted"))]
fn total_ssq(subsets: Vec<Vec<usize>>, ps: &PyPointSet, mode: &str) -> PyResult<f64> {
    let part = core::Partition::new(subsets, ps.0.len()).map_err(to_py)?;
    core::total_ssq(&part, &ps.0, parse(mode)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (ps, trace = false))]
fn aa_run(py: Python<'_>, ps: &PyPointSet, trace: bool) -> PyResult<PyThinningResult> {
    py.detach(|| {
        if trace {
            core::aa_run_traced(&ps.0).map(|(r, t)| PyThinningResult::traced(r, t))
        } else {
            core::aa_run(&ps.0).map(PyThinningResult::plain)
        }
    })
    .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (ps, mode = "weighted", trace = false))]
fn da_run(py: Python<'_>, ps: &PyPointSet, mode: &str, trace: bool) -> PyResult<PyThinningResult> {
    let mode: NormMode = parse(mode)?;
    py.detach(|| {
        if trace {
            core::da_run_traced(&ps.0, mode).map(|(r, t)| PyThinningResult::traced(r, t))
        } else {
            core::da_run(&ps.0, mode).map(PyThinningResult::plain)
        }
    })
    .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (ps, radius = 0.5))]
fn grid_partition(ps: &PyPointSet, radius: f64) -> PyResult<PyThinningResult> {
    core::grid_partition(&ps.0, radius)
        .map(PyThinningResult::plain)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (p, tol, radius = 0.5))]
fn grid_cell(p: Vec<f64>, tol: &PyTolerance, radius: f64) -> PyResult<Vec<i64>> {
    core::grid_cell(&p, &tol.0, radius)
        .map(|c| c.0)
        .map_err(to_py)
}

/// Runs one strategy, including the grid-prefiltered composites.
#[pyfunction]
#[pyo3(signature = (ps, algorithm = "aa", grid_radius = None, norm_mode = "weighted", trace = false))]
fn thin(
    py: Python<'_>,
    ps: &PyPointSet,
    algorithm: &str,
    grid_radius: Option<f64>,
    norm_mode: &str,
    trace: bool,
) -> PyResult<PyRunOutput> {
    let algorithm: Algorithm = parse(algorithm)?;
    let options = ThinOptions {
        grid_radius,
        norm_mode: parse(norm_mode)?,
        emit_trace: trace,
    };
    py.detach(|| core::thin(&ps.0, algorithm, &options))
        .map(PyRunOutput)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (count = bench::CIRCLE_COUNT, radius = bench::CIRCLE_RADIUS, jitter = bench::DEFAULT_JITTER, seed = bench::DEFAULT_SEED))]
fn gen_circle(count: usize, radius: f64, jitter: f64, seed: u64) -> Vec<Vec<f64>> {
    let spec = CircleSpec {
        count,
        radius,
        jitter,
        seed,
        ..CircleSpec::default()
    };
    rows(&bench::gen_circle(&spec))
}

#[pyfunction]
#[pyo3(signature = (seed = bench::CLOUDS_SEED))]
fn gen_clouds(seed: u64) -> Vec<Vec<f64>> {
    rows(&bench::gen_clouds_seeded(seed))
}

#[pymodule]
fn thinout(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTolerance>()?;
    m.add_class::<PyPointSet>()?;
    m.add_class::<PyThinningResult>()?;
    m.add_class::<PyRunOutput>()?;
    m.add_function(wrap_pyfunction!(weighted_norm_2, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_norm_inf, m)?)?;
    m.add_function(wrap_pyfunction!(in_neighborhood, m)?)?;
    m.add_function(wrap_pyfunction!(centroid, m)?)?;
    m.add_function(wrap_pyfunction!(is_collapsable, m)?)?;
    m.add_function(wrap_pyfunction!(central_ssq, m)?)?;
    m.add_function(wrap_pyfunction!(total_ssq, m)?)?;
    m.add_function(wrap_pyfunction!(aa_run, m)?)?;
    m.add_function(wrap_pyfunction!(da_run, m)?)?;
    m.add_function(wrap_pyfunction!(grid_partition, m)?)?;
    m.add_function(wrap_pyfunction!(grid_cell, m)?)?;
    m.add_function(wrap_pyfunction!(thin, m)?)?;
    m.add_function(wrap_pyfunction!(gen_circle, m)?)?;
    m.add_function(wrap_pyfunction!(gen_clouds, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
