//! Python module `hopf_forge_py`. Structured results come back as plain
//! dicts and lists, built from the same JSON the CLI prints.

use std::sync::Arc;

use num_complex::Complex64;
use num_rational::BigRational;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyString;
use serde::Serialize;

use hopf_forge::abelian::FgAbelianGroup;
use hopf_forge::character::{burnside_character_table, DEFAULT_SEED, DEFAULT_TOLERANCE};
use hopf_forge::dual::{embed_group_point, polar_decompose, DualElement, Expr, ExprJson, DEFAULT_TRIALS};
use hopf_forge::envelope::{
    associativity_residual, builtin_lie, hopf_law_report, FdLieAlgebra, LieJson, NumLit, TruncatedUElement, UAlgebra,
};
use hopf_forge::group::{builtin_group, FiniteGroup};
use hopf_forge::hopf::{enumerate_grouplike, hopf_axiom_residuals, AlgebraElement, Field};
use hopf_forge::selftest::run_selftest;
use hopf_forge::wedderburn::central_idempotents;
use hopf_forge::Error;

fn err(e: Error) -> PyErr {
    if e.is_input_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

trait OrPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPy<T> for hopf_forge::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (s,))?.unbind())
}

/// Accepts a JSON string or any object `json.dumps` understands.
fn from_py<T: serde::de::DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = if let Ok(s) = obj.cast::<PyString>() {
        s.to_str()?.to_owned()
    } else {
        obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?
    };
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(format!("bad JSON input: {e}")))
}

fn field(s: &str) -> PyResult<Field> {
    s.parse::<Field>().py_err()
}

#[pyclass(frozen, name = "Group", module = "hopf_forge_py")]
struct PyGroup {
    inner: Arc<FiniteGroup>,
}

#[pymethods]
impl PyGroup {
    /// `c6`, `d4`, `s3`, `q8`, `c2*s3`, ...
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        Ok(PyGroup { inner: Arc::new(builtin_group(name).py_err()?) })
    }

    #[staticmethod]
    fn from_table(rows: Vec<Vec<usize>>) -> PyResult<Self> {
        Ok(PyGroup { inner: Arc::new(FiniteGroup::from_table(rows).py_err()?) })
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn identity(&self) -> usize {
        self.inner.identity()
    }

    fn mul(&self, g: usize, h: usize) -> PyResult<usize> {
        self.check(g)?;
        self.check(h)?;
        Ok(self.inner.mul(g, h))
    }

    fn inv(&self, g: usize) -> PyResult<usize> {
        self.check(g)?;
        Ok(self.inner.inv(g))
    }

    fn is_abelian(&self) -> bool {
        self.inner.is_abelian()
    }

    fn table(&self) -> Vec<Vec<usize>> {
        self.inner.rows()
    }

    #[pyo3(signature = (tolerance = DEFAULT_TOLERANCE, seed = None))]
    fn character_table(&self, py: Python<'_>, tolerance: f64, seed: Option<u64>) -> PyResult<Py<PyAny>> {
        let t = burnside_character_table(&self.inner, tolerance, seed.unwrap_or(DEFAULT_SEED)).py_err()?;
        to_py(py, &t.to_report().py_err()?)
    }

    /// Central idempotent certificate of `K[G]` as a dict.
    #[pyo3(signature = (field = "R", tolerance = DEFAULT_TOLERANCE, seed = None))]
    fn decompose(&self, py: Python<'_>, field: &str, tolerance: f64, seed: Option<u64>) -> PyResult<Py<PyAny>> {
        let f = self::field(field)?;
        let t = burnside_character_table(&self.inner, tolerance, seed.unwrap_or(DEFAULT_SEED)).py_err()?;
        to_py(py, &central_idempotents(&t, f, tolerance).py_err()?.to_json())
    }

    /// Grouplike elements of `K[G]`, each returned as the group element it is.
    #[pyo3(signature = (field = "C"))]
    fn grouplikes(&self, field: &str) -> PyResult<Vec<usize>> {
        let found = enumerate_grouplike(&self.inner, self::field(field)?);
        let one = Complex64::new(1.0, 0.0);
        found
            .iter()
            .map(|a| {
                let nz: Vec<usize> = (0..self.inner.order()).filter(|&g| a.coeff(g).norm() != 0.0).collect();
                match nz.as_slice() {
                    [g] if a.coeff(*g) == one => Ok(*g),
                    _ => Err(PyRuntimeError::new_err("grouplike is not a group element")),
                }
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Group(order={})", self.inner.order())
    }
}

impl PyGroup {
    fn check(&self, g: usize) -> PyResult<()> {
        if g < self.inner.order() {
            Ok(())
        } else {
            Err(PyValueError::new_err(format!("element {g} out of range")))
        }
    }
}

#[pyclass(frozen, name = "GroupAlgebraElement", module = "hopf_forge_py")]
struct PyAlgebraElement {
    inner: AlgebraElement,
}

#[pymethods]
impl PyAlgebraElement {
    #[new]
    #[pyo3(signature = (group, coeffs, field = "C"))]
    fn new(group: &PyGroup, coeffs: Vec<Complex64>, field: &str) -> PyResult<Self> {
        let inner = AlgebraElement::new(&group.inner, self::field(field)?, coeffs, DEFAULT_TOLERANCE).py_err()?;
        Ok(PyAlgebraElement { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (group, g, field = "C"))]
    fn basis(group: &PyGroup, g: usize, field: &str) -> PyResult<Self> {
        group.check(g)?;
        Ok(PyAlgebraElement { inner: AlgebraElement::basis(&group.inner, self::field(field)?, g) })
    }

    #[getter]
    fn coeffs(&self) -> Vec<Complex64> {
        self.inner.coeffs().to_vec()
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        Ok(PyAlgebraElement { inner: self.inner.add(&other.inner).py_err()? })
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        Ok(PyAlgebraElement { inner: self.inner.sub(&other.inner).py_err()? })
    }

    fn __mul__(&self, other: &Self) -> PyResult<Self> {
        Ok(PyAlgebraElement { inner: self.inner.multiply(&other.inner).py_err()? })
    }

    fn counit(&self) -> Complex64 {
        self.inner.counit()
    }

    fn antipode(&self) -> Self {
        PyAlgebraElement { inner: self.inner.antipode() }
    }

    #[pyo3(signature = (tolerance = 1e-15))]
    fn exp(&self, tolerance: f64) -> Self {
        PyAlgebraElement { inner: self.inner.exp(tolerance) }
    }

    /// `Delta(a)` as the `|G| x |G|` coefficient matrix.
    fn comultiply(&self) -> Vec<Vec<Complex64>> {
        let t = self.inner.comultiply();
        let n = self.inner.coeffs().len();
        (0..n).map(|g| (0..n).map(|h| t.coeff(g, h)).collect()).collect()
    }

    /// Residuals of the Hopf axioms evaluated on this element.
    fn hopf_residuals(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &hopf_axiom_residuals(&self.inner))
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        self.inner.max_abs_diff(&other.inner)
    }
}

#[pyclass(frozen, name = "AbelianDual", module = "hopf_forge_py")]
struct PyAbelianDual {
    inner: Arc<FgAbelianGroup>,
}

#[pymethods]
impl PyAbelianDual {
    /// `Z^rank + Z/t_1 + ...`, canonicalized.
    #[new]
    #[pyo3(signature = (rank, torsion = Vec::new()))]
    fn new(rank: usize, torsion: Vec<u64>) -> PyResult<Self> {
        Ok(PyAbelianDual { inner: Arc::new(FgAbelianGroup::new(rank, &torsion).py_err()?) })
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn torsion(&self) -> Vec<u64> {
        self.inner.torsion().to_vec()
    }

    /// An element of `R^Ghat` from the JSON expression grammar (dict or string).
    fn element(&self, expr: &Bound<'_, PyAny>) -> PyResult<PyDualElement> {
        let j: ExprJson = from_py(expr)?;
        Ok(PyDualElement { inner: DualElement::from_json(&self.inner, &j).py_err()? })
    }

    #[pyo3(signature = (angles, residues = Vec::new()))]
    fn embed(&self, angles: Vec<f64>, residues: Vec<u64>) -> PyResult<PyDualElement> {
        Ok(PyDualElement { inner: embed_group_point(&self.inner, &angles, &residues).py_err()? })
    }
}

#[pyclass(frozen, name = "DualElement", module = "hopf_forge_py")]
struct PyDualElement {
    inner: DualElement,
}

#[pymethods]
impl PyDualElement {
    #[pyo3(signature = (free, torsion = Vec::new()))]
    fn evaluate(&self, free: Vec<i64>, torsion: Vec<i64>) -> PyResult<Complex64> {
        let chi = self.inner.dual().element(free, torsion).py_err()?;
        self.inner.evaluate(&chi).py_err()
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        Ok(PyDualElement { inner: self.inner.add(&other.inner).py_err()? })
    }

    fn __mul__(&self, other: &Self) -> PyResult<Self> {
        Ok(PyDualElement { inner: self.inner.mul(&other.inner).py_err()? })
    }

    fn exp(&self) -> Self {
        PyDualElement { inner: self.inner.exp() }
    }

    fn sigma(&self) -> Self {
        PyDualElement { inner: self.inner.sigma() }
    }

    #[pyo3(signature = (trials = DEFAULT_TRIALS, tolerance = DEFAULT_TOLERANCE, seed = None))]
    fn is_grouplike(&self, py: Python<'_>, trials: usize, tolerance: f64, seed: Option<u64>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.is_grouplike(trials, tolerance, seed.unwrap_or(DEFAULT_SEED)))
    }

    #[pyo3(signature = (trials = DEFAULT_TRIALS, tolerance = DEFAULT_TOLERANCE, seed = None))]
    fn is_primitive(&self, py: Python<'_>, trials: usize, tolerance: f64, seed: Option<u64>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.is_primitive(trials, tolerance, seed.unwrap_or(DEFAULT_SEED)))
    }

    /// `{"lie_part": [...], "group_part": {...}}` for a grouplike leaf.
    fn polar(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        match self.inner.expr() {
            Expr::Grouplike(g) => to_py(py, &polar_decompose(g)),
            _ => Err(PyValueError::new_err("polar needs a grouplike leaf")),
        }
    }

    fn to_json(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.to_json())
    }
}

/// `U(L)` over the rationals at a fixed cutoff. Elements are lists of
/// `[monomial, coefficient]` pairs in the symmetrized PBW basis, with
/// coefficients given as numbers or strings such as `"1/2"`.
#[pyclass(frozen, name = "Envelope", module = "hopf_forge_py")]
struct PyEnvelope {
    lie: Arc<FdLieAlgebra<BigRational>>,
    alg: UAlgebra<BigRational>,
}

type Terms = Vec<(Vec<usize>, NumLit)>;

impl PyEnvelope {
    fn element(&self, obj: &Bound<'_, PyAny>) -> PyResult<TruncatedUElement<BigRational>> {
        let raw: Terms = from_py(obj)?;
        let mut terms = Vec::with_capacity(raw.len());
        for (mut m, c) in raw {
            if m.iter().any(|&i| i >= self.lie.dim()) || m.len() > self.alg.cutoff() {
                return Err(PyValueError::new_err(format!("monomial {m:?} out of range")));
            }
            m.sort_unstable();
            terms.push((m, c.to_scalar::<BigRational>().py_err()?));
        }
        Ok(TruncatedUElement::from_terms(self.alg.cutoff(), terms))
    }

    fn terms(a: &TruncatedUElement<BigRational>) -> Vec<(Vec<usize>, String)> {
        a.terms().iter().map(|(m, c)| (m.clone(), c.to_string())).collect()
    }
}

#[pymethods]
impl PyEnvelope {
    /// `lie` is a builtin name (`sl2`, `abelian2`, `sl2*abelian1`) or a JSON
    /// object `{"dim": n, "field": "R", "brackets": [[i, j, [c...]], ...]}`.
    #[new]
    fn new(lie: &Bound<'_, PyAny>, cutoff: usize) -> PyResult<Self> {
        let l = match lie.cast::<PyString>() {
            Ok(s) if !s.to_str()?.trim_start().starts_with('{') => builtin_lie(s.to_str()?, Field::R).py_err()?,
            _ => FdLieAlgebra::from_json(&from_py::<LieJson>(lie)?).py_err()?,
        };
        let lie = Arc::new(l);
        Ok(PyEnvelope { alg: UAlgebra::new(&lie, cutoff), lie })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.lie.dim()
    }

    #[getter]
    fn cutoff(&self) -> usize {
        self.alg.cutoff()
    }

    fn basis(&self) -> Vec<Vec<usize>> {
        self.alg.basis()
    }

    fn multiply(&self, a: &Bound<'_, PyAny>, b: &Bound<'_, PyAny>) -> PyResult<Vec<(Vec<usize>, String)>> {
        let p = self.alg.multiply(&self.element(a)?, &self.element(b)?).py_err()?;
        Ok(Self::terms(&p))
    }

    fn exp(&self, a: &Bound<'_, PyAny>) -> PyResult<Vec<(Vec<usize>, String)>> {
        Ok(Self::terms(&self.alg.exp(&self.element(a)?).py_err()?))
    }

    fn antipode(&self, a: &Bound<'_, PyAny>) -> PyResult<Vec<(Vec<usize>, String)>> {
        Ok(Self::terms(&self.alg.antipode(&self.element(a)?).py_err()?))
    }

    /// Residual of `Delta(g) = g (x) g` up to total degree `D`.
    fn grouplike_residual(&self, g: &Bound<'_, PyAny>) -> PyResult<f64> {
        self.alg.grouplike_residual(&self.element(g)?).py_err()
    }

    fn primitive_basis(&self) -> PyResult<Vec<Vec<(Vec<usize>, String)>>> {
        Ok(self.alg.primitive_space(0.0).py_err()?.iter().map(Self::terms).collect())
    }

    fn hopf_laws(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &hopf_law_report(&self.alg).py_err()?)
    }

    #[pyo3(signature = (triples = 20, seed = None))]
    fn associativity_residual(&self, triples: usize, seed: Option<u64>) -> PyResult<f64> {
        associativity_residual(&self.lie, self.alg.cutoff(), triples, seed.unwrap_or(DEFAULT_SEED)).py_err()
    }
}

/// Runs the acceptance suite and returns its report.
#[pyfunction]
#[pyo3(signature = (seed = None))]
fn selftest(py: Python<'_>, seed: Option<u64>) -> PyResult<Py<PyAny>> {
    let s = seed.unwrap_or(DEFAULT_SEED);
    let report = py.detach(|| run_selftest(s, false));
    to_py(py, &report)
}

#[pymodule]
pub fn hopf_forge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyGroup>()?;
    m.add_class::<PyAlgebraElement>()?;
    m.add_class::<PyAbelianDual>()?;
    m.add_class::<PyDualElement>()?;
    m.add_class::<PyEnvelope>()?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
