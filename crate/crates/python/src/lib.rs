//! Python bindings: weight systems, the polynomial solves, kernels, the
//! identity suite and the random matrix density comparison.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use mopcd::kernel::{build_kernel, KernelEval};
use mopcd::multi_index::{canonical_path, MultiIndex, PathOrder};
use mopcd::rmt::{density_compare as rmt_density_compare, Bins, SourceModel};
use mopcd::suite::{verify as run_verify, SuiteOptions, Tolerances};
use mopcd::weights::{Precision, WeightSystem as CoreWeights};

create_exception!(
    mopcd_py,
    MopcdError,
    PyException,
    "Solver or input error; `args[0]` is the error kind."
);

fn err(e: mopcd::Error) -> PyErr {
    MopcdError::new_err((e.kind(), e.to_string()))
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any().unbind(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any().unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any().unbind()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, to_py(py, item)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

fn serialised(py: Python<'_>, v: &impl serde::Serialize) -> PyResult<Py<PyAny>> {
    to_py(py, &serde_json::to_value(v).expect("serialisable"))
}

fn index(ws: &CoreWeights, n: Vec<usize>) -> PyResult<MultiIndex> {
    if n.len() != ws.m() {
        return Err(err(mopcd::Error::InvalidInput(format!(
            "multi-index has {} components, the weight system has {}",
            n.len(),
            ws.m()
        ))));
    }
    Ok(MultiIndex::new(n))
}

fn order(path: &str) -> PyResult<PathOrder> {
    match path {
        "block" => Ok(PathOrder::Block),
        "roundrobin" => Ok(PathOrder::RoundRobin),
        other => Err(err(mopcd::Error::InvalidInput(format!(
            "path must be \"block\" or \"roundrobin\", got {other:?}"
        )))),
    }
}

/// A finite family of weights together with the arithmetic used for solves.
#[pyclass(frozen)]
struct WeightSystem {
    inner: CoreWeights,
}

#[pymethods]
impl WeightSystem {
    /// Parse the JSON configuration document used by the command line tool.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        CoreWeights::from_json(text)
            .map(|inner| WeightSystem { inner })
            .map_err(err)
    }

    /// Gaussian weights `exp(-x²/2 + a x)`, one per drift.
    #[staticmethod]
    #[pyo3(signature = (drifts, extended = false))]
    fn gaussian_drifts(drifts: Vec<f64>, extended: bool) -> PyResult<Self> {
        let precision = if extended {
            Precision::Extended
        } else {
            Precision::Double
        };
        CoreWeights::gaussian_drifts(&drifts, precision)
            .map(|inner| WeightSystem { inner })
            .map_err(err)
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn exact(&self) -> bool {
        matches!(self.inner.mode(), mopcd::ScalarMode::ExactRational)
    }

    /// `∫ x^j w_k(x) dx` in binary64.
    fn moment(&self, k: usize, j: usize) -> PyResult<f64> {
        self.inner.moment::<f64>(k, j).map_err(err)
    }

    /// `P_n`, the type I polynomials and the h-table below `n`, as a dict.
    /// Exact systems give coefficients as `"p/q"` strings.
    fn compute(&self, py: Python<'_>, n: Vec<usize>) -> PyResult<Py<PyAny>> {
        let n = index(&self.inner, n)?;
        let v = mopcd::export::compute(&self.inner, &n).map_err(err)?;
        to_py(py, &v)
    }

    /// Coefficients of the monic type II polynomial, constant term first.
    fn type2(&self, py: Python<'_>, n: Vec<usize>) -> PyResult<Py<PyAny>> {
        let out = self.compute(py, n)?;
        Ok(out.bind(py).get_item("P")?.unbind())
    }

    /// Coefficients of each `A^{(k)}_n`, constant term first.
    fn type1(&self, py: Python<'_>, n: Vec<usize>) -> PyResult<Py<PyAny>> {
        let out = self.compute(py, n)?;
        Ok(out.bind(py).get_item("A")?.unbind())
    }

    /// Kernel `K_n` along the block or round-robin path to `n`.
    #[pyo3(signature = (n, path = "block"))]
    fn kernel(&self, n: Vec<usize>, path: &str) -> PyResult<Kernel> {
        let n = index(&self.inner, n)?;
        if !n.all_positive() {
            return Err(err(mopcd::Error::DegenerateIndex { index: n }));
        }
        let path = canonical_path(&n, order(path)?);
        build_kernel(&self.inner, &path)
            .map(|inner| Kernel { inner })
            .map_err(err)
    }

    /// Run the identity suite at `n`; returns the report as a dict.
    #[pyo3(signature = (n, tol = None, seed = 0, path = "block"))]
    fn verify(&self, py: Python<'_>, n: Vec<usize>, tol: Option<f64>, seed: u64, path: &str) -> PyResult<Py<PyAny>> {
        let n = index(&self.inner, n)?;
        let opts = SuiteOptions {
            tol: tol.map_or_else(Tolerances::default, Tolerances::uniform),
            path: mopcd::suite::PathChoice::Order(order(path)?),
            seed,
            ..SuiteOptions::default()
        };
        let report = py.detach(|| run_verify(&self.inner, &n, &opts)).map_err(err)?;
        serialised(py, &report)
    }

    fn __repr__(&self) -> String {
        format!("WeightSystem(m={}, {:?})", self.inner.m(), self.inner.mode())
    }
}

/// Christoffel-Darboux kernel evaluated in binary64.
#[pyclass(frozen)]
struct Kernel {
    inner: Box<dyn KernelEval>,
}

#[pymethods]
impl Kernel {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// `K_n(x, y)`; the closed form away from the diagonal.
    fn __call__(&self, x: f64, y: f64) -> PyResult<f64> {
        self.inner.eval(x, y).map_err(err)
    }

    fn direct(&self, x: f64, y: f64) -> PyResult<f64> {
        self.inner.direct(x, y).map_err(err)
    }

    fn cd(&self, x: f64, y: f64) -> PyResult<f64> {
        self.inner.cd(x, y).map_err(err)
    }

    fn svi(&self, x: f64, y: f64) -> PyResult<f64> {
        self.inner.svi(x, y).map_err(err)
    }

    fn diagonal(&self, x: f64) -> PyResult<f64> {
        self.inner.diagonal(x).map_err(err)
    }
}

/// Monte Carlo eigenvalue histogram of `H + A` against `K_n(x, x)`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (alphas, multiplicities, samples = 200_000, lo = -4.5, hi = 4.5, bins = 40, seed = 0))]
fn density_compare(
    py: Python<'_>,
    alphas: Vec<f64>,
    multiplicities: Vec<usize>,
    samples: usize,
    lo: f64,
    hi: f64,
    bins: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let model = SourceModel::new(alphas, multiplicities).map_err(err)?;
    let bins = Bins::new(lo, hi, bins).map_err(err)?;
    let cmp = py
        .detach(|| rmt_density_compare(&model, samples, &bins, seed))
        .map_err(err)?;
    serialised(py, &cmp)
}

#[pymodule]
fn mopcd_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MopcdError", m.py().get_type::<MopcdError>())?;
    m.add_class::<WeightSystem>()?;
    m.add_class::<Kernel>()?;
    m.add_function(wrap_pyfunction!(density_compare, m)?)?;
    Ok(())
}
