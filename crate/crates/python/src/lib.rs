//! Python bindings. Rationals cross the boundary as `fractions.Fraction`
//! (strings like `"9/10"` and plain ints are accepted on input).

use num_bigint::BigInt;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use pmcontext::correlation::{self as corr, CorrelationPoint};
use pmcontext::dualdesc;
use pmcontext::exactgeom::parse_rational;
use pmcontext::io::{self as pio, Polytope};
use pmcontext::pipeline::{self, VerifyOptions};
use pmcontext::quantum::{self as q, CabelloSource, DepolarizingStrength};
use pmcontext::scenario::{self as sc, AssignmentRole, CellGrid};
use pmcontext::Rational;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    if let Ok(s) = obj.extract::<String>() {
        return parse_rational(&s).ok_or_else(|| err(format!("not a rational: {s:?}")));
    }
    if let Ok(i) = obj.extract::<BigInt>() {
        return Ok(Rational::from_integer(i));
    }
    obj.extract::<Rational>()
}

fn strength(obj: &Bound<'_, PyAny>) -> PyResult<DepolarizingStrength> {
    DepolarizingStrength::new(rational(obj)?).map_err(err)
}

fn grid_of(rows: Vec<Vec<Bound<'_, PyAny>>>) -> PyResult<CorrelationPoint> {
    let rows = rows.iter().map(|r| r.iter().map(rational).collect()).collect::<PyResult<Vec<Vec<Rational>>>>()?;
    CellGrid::from_rows(rows).map_err(err)
}

#[pyclass(name = "Scenario", from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: sc::Scenario,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn peres_mermin() -> Self {
        Self { inner: sc::Scenario::peres_mermin() }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: sc::Scenario::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(err)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.rows, self.inner.cols)
    }

    fn build_assignment_polytope(&self) -> PyHRep {
        PyHRep { inner: self.inner.build_assignment_polytope(AssignmentRole::Measurement) }
    }

    /// Indices of violated contexts for a +-1 grid.
    fn check_deterministic_assignment(&self, signs: Vec<Vec<i8>>) -> PyResult<Vec<usize>> {
        let grid = CellGrid::from_rows(signs).map_err(err)?;
        let d = sc::DeterministicAssignment::new(grid).map_err(err)?;
        Ok(self.inner.check_deterministic_assignment(&d))
    }

    fn logically_possible_sign_matrices(&self) -> Vec<Vec<Vec<i8>>> {
        self.inner.logically_possible_sign_matrices().iter().map(CellGrid::to_rows).collect()
    }

    fn __repr__(&self) -> String {
        format!("Scenario({:?}, {}x{}, {} contexts)", self.inner.name, self.inner.rows, self.inner.cols, self.inner.contexts.len())
    }
}

#[pyclass(name = "HRep", from_py_object)]
#[derive(Clone)]
struct PyHRep {
    inner: pmcontext::HRep,
}

#[pymethods]
impl PyHRep {
    /// Rows `[b, a1, .., ad]` meaning `b + a.x >= 0`.
    #[new]
    fn new(dimension: usize, rows: Vec<Vec<i64>>) -> PyResult<Self> {
        Ok(Self { inner: pmcontext::HRep::from_i64_rows(dimension, &rows).map_err(err)? })
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn rows(&self) -> Vec<Vec<BigInt>> {
        self.inner.rows().iter().map(|r| r.entries().to_vec()).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn facets_to_vertices(&self) -> PyResult<PyVRep> {
        Ok(PyVRep { inner: dualdesc::facets_to_vertices(&self.inner).map_err(err)? })
    }

    fn remove_redundant(&self) -> PyResult<Self> {
        Ok(Self { inner: dualdesc::remove_redundant_inequalities(&self.inner).map_err(err)? })
    }

    fn to_text(&self) -> String {
        pio::write_hrep(&self.inner)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("HRep(dimension={}, rows={})", self.inner.dimension(), self.inner.len())
    }
}

#[pyclass(name = "VRep", from_py_object)]
#[derive(Clone)]
struct PyVRep {
    inner: pmcontext::VRep,
}

#[pymethods]
impl PyVRep {
    #[new]
    fn new(points: Vec<Vec<Bound<'_, PyAny>>>) -> PyResult<Self> {
        let pts = points.iter().map(|p| p.iter().map(rational).collect()).collect::<PyResult<Vec<Vec<Rational>>>>()?;
        let d = pts.first().map_or(0, Vec::len);
        Ok(Self { inner: pmcontext::VRep::from_points(d, &pts).map_err(err)? })
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn points(&self) -> Vec<Vec<Rational>> {
        self.inner.points()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn vertices_to_facets(&self) -> PyResult<PyHRep> {
        Ok(PyHRep { inner: dualdesc::vertices_to_facets(&self.inner).map_err(err)? })
    }

    fn to_text(&self) -> String {
        pio::write_vrep(&self.inner)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("VRep(dimension={}, points={})", self.inner.dimension(), self.inner.len())
    }
}

/// `sum alpha_ij omega_ij <= beta`.
#[pyclass(name = "Inequality", from_py_object)]
#[derive(Clone)]
struct PyInequality {
    inner: corr::Inequality,
}

#[pymethods]
impl PyInequality {
    #[new]
    fn new(alpha: [[i64; 3]; 3], beta: i64) -> Self {
        Self { inner: corr::Inequality::new(alpha, beta) }
    }

    #[getter]
    fn alpha(&self) -> Vec<Vec<i64>> {
        self.inner.alpha.clone()
    }

    #[getter]
    fn beta(&self) -> i64 {
        self.inner.beta
    }

    #[getter]
    fn klass(&self) -> Option<String> {
        self.inner.klass.map(|c| c.to_string())
    }

    #[getter]
    fn orbit(&self) -> Option<usize> {
        self.inner.orbit
    }

    #[getter]
    fn representative(&self) -> bool {
        self.inner.representative
    }

    /// `(value, violated)`.
    fn evaluate(&self, omega: Vec<Vec<Bound<'_, PyAny>>>) -> PyResult<(Rational, bool)> {
        Ok(corr::evaluate(&self.inner, &grid_of(omega)?))
    }

    /// Threshold on `r^2` above which uniform correlations violate it.
    fn noise_threshold(&self) -> Option<Rational> {
        q::noise_threshold(&self.inner)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(err)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Inequality({})", self.inner)
    }
}

#[pyclass(name = "Derivation")]
struct PyDerivation {
    inner: pipeline::Derivation,
}

#[pymethods]
impl PyDerivation {
    fn assignment_vertices(&self) -> PyVRep {
        PyVRep { inner: self.inner.correlation.assignment.clone() }
    }

    fn correlation_vertices(&self) -> PyVRep {
        PyVRep { inner: self.inner.correlation.vertices.clone() }
    }

    fn facets(&self) -> PyHRep {
        PyHRep { inner: self.inner.correlation_h.clone() }
    }

    fn inequalities(&self) -> Vec<PyInequality> {
        self.inner.inequalities.iter().map(|i| PyInequality { inner: i.clone() }).collect()
    }

    #[getter]
    fn pairings(&self) -> usize {
        self.inner.correlation.products
    }

    fn orbit_sizes(&self) -> Vec<usize> {
        self.inner.orbit_sizes()
    }

    fn group_orders(&self) -> (Option<usize>, Option<usize>) {
        (
            self.inner.assignment_group.as_ref().map(|g| g.order()),
            self.inner.correlation_group.as_ref().map(|g| g.order()),
        )
    }

    /// The full artifact as JSON, with a quantum report at strength `r`.
    #[pyo3(signature = (r=None))]
    fn artifact_json(&self, r: Option<&Bound<'_, PyAny>>) -> PyResult<String> {
        let r = r.map(strength).transpose()?;
        let artifact = pipeline::Artifact::build(&self.inner, r.as_ref()).map_err(err)?;
        serde_json::to_string(&artifact).map_err(err)
    }
}

#[pyfunction]
#[pyo3(signature = (scenario=None))]
fn derive(py: Python<'_>, scenario: Option<PyScenario>) -> PyResult<PyDerivation> {
    let scenario = scenario.map_or_else(sc::Scenario::peres_mermin, |s| s.inner);
    let inner = py.detach(|| pipeline::derive(&scenario)).map_err(err)?;
    Ok(PyDerivation { inner })
}

/// Parses the `H`/`V` text format.
#[pyfunction]
fn parse_polytope(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    Ok(match pio::parse_polytope(text).map_err(err)? {
        Polytope::H(h) => Py::new(py, PyHRep { inner: h })?.into_any(),
        Polytope::V(v) => Py::new(py, PyVRep { inner: v })?.into_any(),
    })
}

/// Depolarized correlation grid at strength `r`.
#[pyfunction]
fn correlations(r: &Bound<'_, PyAny>) -> PyResult<Vec<Vec<Rational>>> {
    Ok(q::correlations(&strength(r)?).map_err(err)?.to_rows())
}

/// Cabello's sum under the compatibility identities.
#[pyfunction]
fn cabello_identities() -> Rational {
    q::cabello_r(&sc::Scenario::peres_mermin(), &CabelloSource::CompatibilityIdentities)
}

/// Runs the verification groups (all when `only` is empty); returns
/// `(group, name, expected, computed, passed)` tuples.
#[pyfunction]
#[pyo3(signature = (only=Vec::new()))]
fn verify(py: Python<'_>, only: Vec<String>) -> Vec<(String, String, String, String, bool)> {
    let report = py.detach(|| pipeline::verify_all(&VerifyOptions { only }));
    report.entries.into_iter().map(|e| (e.group, e.name, e.expected, e.computed, e.passed)).collect()
}

#[pymodule]
#[pyo3(name = "pmcontext")]
pub fn pmcontext_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyHRep>()?;
    m.add_class::<PyVRep>()?;
    m.add_class::<PyInequality>()?;
    m.add_class::<PyDerivation>()?;
    m.add_function(wrap_pyfunction!(derive, m)?)?;
    m.add_function(wrap_pyfunction!(parse_polytope, m)?)?;
    m.add_function(wrap_pyfunction!(correlations, m)?)?;
    m.add_function(wrap_pyfunction!(cabello_identities, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
