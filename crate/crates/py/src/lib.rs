//! Python bindings: structures, morphisms, built sequences, and the
//! bounded checks, plus a pass-through to the command line.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use fraisse::category::Category;
use fraisse::generic::{build_fraisse, BuildConfig, OnePointExtensions};
use fraisse::normed::{minkowski, parse_rational};
use fraisse::properties::{check_amalgamation, check_category_laws, check_jep};
use fraisse::retracts::{proper_amalgamate, random_rp_span, sets_counterexample, verify_proper, Retractive};
use fraisse::sequences::{check_a, check_u, validate_sequence};
use fraisse::{trees, Concrete, FinStructure, Morphism as CoreMorphism};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn err(e: fraisse::Error) -> PyErr {
    match e {
        fraisse::Error::Parse { .. } | fraisse::Error::InvalidStructure(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn concrete(name: &str) -> PyResult<Concrete> {
    Concrete::by_name(name).ok_or_else(|| PyValueError::new_err(format!("unknown category `{name}`")))
}

/// A finite structure.
#[pyclass(name = "Structure", frozen, skip_from_py_object, module = "pyfraisse")]
#[derive(Clone)]
pub struct PyStructure(Arc<FinStructure>);

#[pymethods]
impl PyStructure {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        FinStructure::parse(text).map(|s| PyStructure(Arc::new(s))).map_err(err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind().keyword()
    }

    fn __len__(&self) -> usize {
        self.0.size()
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    fn __repr__(&self) -> String {
        self.0.to_string()
    }
}

/// A map between two structures.
#[pyclass(name = "Morphism", frozen, skip_from_py_object, module = "pyfraisse")]
#[derive(Clone)]
pub struct PyMorphism(CoreMorphism);

#[pymethods]
impl PyMorphism {
    #[new]
    fn new(source: &PyStructure, target: &PyStructure, images: Vec<String>) -> PyResult<Self> {
        let toks: Vec<&str> = images.iter().map(String::as_str).collect();
        CoreMorphism::parse_map(source.0.clone(), target.0.clone(), &toks)
            .map(PyMorphism)
            .map_err(err)
    }

    #[getter]
    fn source(&self) -> PyStructure {
        PyStructure(self.0.source().clone())
    }

    #[getter]
    fn target(&self) -> PyStructure {
        PyStructure(self.0.target().clone())
    }

    /// Target ids in source order.
    fn images(&self) -> String {
        self.0.map_text()
    }

    /// `self ∘ other`.
    fn after(&self, other: &PyMorphism) -> PyResult<PyMorphism> {
        self.0.after(&other.0).map(PyMorphism).map_err(err)
    }

    fn is_arrow_in(&self, category: &str) -> PyResult<bool> {
        Ok(concrete(category)?.is_arrow(&self.0))
    }

    fn __eq__(&self, other: &PyMorphism) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        self.0.to_string()
    }
}

/// A finite prefix produced by the builder.
#[pyclass(name = "Build", frozen, skip_from_py_object, module = "pyfraisse")]
pub struct PyBuild {
    cat: Concrete,
    inner: fraisse::generic::FraisseBuild<Concrete>,
    header: String,
}

#[pymethods]
impl PyBuild {
    fn __len__(&self) -> usize {
        self.inner.seq.len()
    }

    fn object(&self, n: usize) -> PyResult<PyStructure> {
        if n >= self.inner.seq.len() {
            return Err(PyValueError::new_err("stage out of range"));
        }
        Ok(PyStructure(self.inner.seq.object(n).clone()))
    }

    fn bond(&self, m: usize, n: usize) -> PyResult<PyMorphism> {
        self.inner.seq.bond(m, n).map(|b| PyMorphism(b.clone())).map_err(err)
    }

    fn transcript(&self) -> Vec<String> {
        self.inner.transcript.clone()
    }

    /// Functoriality plus U and A at `bound`.
    fn verify(&self, bound: usize) -> PyResult<bool> {
        let func = validate_sequence(&self.cat, &self.inner.seq).is_ok();
        let u = check_u(&self.cat, &self.inner.seq, bound).holds();
        let a = check_a(&self.cat, &self.inner.seq, bound).map_err(err)?.holds();
        Ok(func && u && a)
    }

    fn to_text(&self) -> PyResult<String> {
        fraisse::io::write_sequence(&self.cat, &self.inner.seq, &self.header).map_err(err)
    }
}

#[pyfunction]
#[pyo3(signature = (category, steps=16, seed=0))]
fn build(category: &str, steps: usize, seed: u64) -> PyResult<PyBuild> {
    let cat = concrete(category)?;
    let cfg = BuildConfig {
        steps,
        seed,
        ..BuildConfig::default()
    };
    let inner = build_fraisse(&cat, &OnePointExtensions, &cfg).map_err(err)?;
    let header = cfg.header(&cat.name());
    Ok(PyBuild { cat, inner, header })
}

/// Bounded property check; returns `(holds, records)`.
#[pyfunction]
#[pyo3(signature = (category, prop, bound=3))]
fn check(category: &str, prop: &str, bound: usize) -> PyResult<(bool, Vec<(String, String)>)> {
    let cat = concrete(category)?;
    let r = match prop {
        "laws" => check_category_laws(&cat, bound),
        "amalgamation" => check_amalgamation(&cat, bound, 2 * bound),
        "jep" => check_jep(&cat, bound, 2 * bound),
        _ => return Err(PyValueError::new_err(format!("unknown property `{prop}`"))),
    }
    .map_err(err)?;
    Ok((r.holds(), r.records()))
}

/// Minkowski norm of `point` (rational strings) in the space given as text.
#[pyfunction]
fn norm(space: &PyStructure, point: Vec<String>) -> PyResult<String> {
    let s = space.0.as_space().ok_or_else(|| PyValueError::new_err("not a normed space"))?;
    let p = point
        .iter()
        .map(|x| parse_rational(x).ok_or_else(|| PyValueError::new_err(format!("bad rational `{x}`"))))
        .collect::<PyResult<Vec<_>>>()?;
    minkowski(s, &p).map(|q| q.to_string()).map_err(err)
}

/// Proper amalgamation of a seeded random span; returns the four arrows
/// as text and whether all four diagrams commute.
#[pyfunction]
#[pyo3(signature = (category="finset-maps", seed=0, bound=3))]
fn rp_amalgamate(category: &str, seed: u64, bound: usize) -> PyResult<(Vec<String>, bool)> {
    let rk = Retractive::by_name(category).ok_or_else(|| PyValueError::new_err(format!("unknown category `{category}`")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (f, g) = random_rp_span(&rk, &mut rng).map_err(err)?;
    let (h, k) = proper_amalgamate(&rk, &f, &g, bound).map_err(err)?;
    let rep = verify_proper(&f, &g, &h, &k).map_err(err)?;
    Ok(([f, g, h, k].iter().map(|p| p.to_string()).collect(), rep.holds()))
}

/// The failing diagram of the sets example as `(name, b, lhs, rhs)`.
#[pyfunction]
fn rp_counterexample() -> PyResult<Option<(String, String, String, String)>> {
    let c = sets_counterexample().map_err(err)?;
    let l = |x| fraisse::retracts::letter(x).to_string();
    Ok(c
        .report
        .diagrams
        .iter()
        .find_map(|d| d.witness.map(|(x, a, b)| (d.name.to_string(), l(x), l(a), l(b)))))
}

#[pyfunction]
#[pyo3(signature = (height, cap=1 << 16))]
fn standard_healthy(height: usize, cap: usize) -> PyResult<PyStructure> {
    let t = trees::build_standard_healthy(height, cap).map_err(err)?;
    Ok(PyStructure(Arc::new(FinStructure::tree(t))))
}

#[pyfunction]
fn embed_tree(t: &PyStructure, v: &PyStructure) -> PyResult<PyMorphism> {
    trees::embed_initial(&t.0, &v.0).map(PyMorphism).map_err(err)
}

#[pyfunction]
fn is_t2_arrow(f: &PyMorphism) -> bool {
    trees::is_t2_arrow(&f.0)
}

/// Run the command line in-process; returns `(exit status, stdout)`.
#[pyfunction]
fn cli(args: Vec<String>) -> (i32, String) {
    use clap::Parser;
    let argv = std::iter::once("fraisse".to_string()).chain(args);
    match fraisse::cli::Cli::try_parse_from(argv) {
        Err(e) => (if e.use_stderr() { 2 } else { 0 }, e.to_string()),
        Ok(c) => match fraisse::cli::execute(&c) {
            Err(e) => (2, format!("error: {e}\n")),
            Ok(o) => {
                let mut s = o.render(c.format);
                if let Some(a) = &o.artifact {
                    s.push_str(a);
                }
                (if o.ok { 0 } else { 1 }, s)
            }
        },
    }
}

#[pymodule]
fn pyfraisse(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStructure>()?;
    m.add_class::<PyMorphism>()?;
    m.add_class::<PyBuild>()?;
    m.add_function(wrap_pyfunction!(build, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(norm, m)?)?;
    m.add_function(wrap_pyfunction!(rp_amalgamate, m)?)?;
    m.add_function(wrap_pyfunction!(rp_counterexample, m)?)?;
    m.add_function(wrap_pyfunction!(standard_healthy, m)?)?;
    m.add_function(wrap_pyfunction!(embed_tree, m)?)?;
    m.add_function(wrap_pyfunction!(is_t2_arrow, m)?)?;
    m.add_function(wrap_pyfunction!(cli, m)?)?;
    Ok(())
}
