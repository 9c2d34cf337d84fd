//! Python bindings: presentations, invariant pairs, codes and the
//! constructions, all exchanged as document text.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use shiftclass_core::doc;
use shiftclass_core::factor::{self, BowenFailure};
use shiftclass_core::invariants::compute_u_eta;
use shiftclass_core::markers::{self, Budget};
use shiftclass_core::pathology::{self, Language, PathologySpec};
use shiftclass_core::{BlockCode, Error, InvariantPair, ShiftPresentation, DEFAULT_TOL};

create_exception!(shiftclass, Inconclusive, PyException, "A comparison or search could not be decided.");

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Inconclusive { .. } | Error::Undecidable(_) | Error::BudgetExhausted(_) | Error::NotFound(_) => {
            Inconclusive::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// One or more presentations taken as a disjoint union.
#[pyclass(frozen)]
struct Presentation {
    parts: Vec<ShiftPresentation>,
}

#[pymethods]
impl Presentation {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Presentation { parts: doc::parse_presentations(text).map_err(py_err)? })
    }

    fn to_doc(&self) -> String {
        doc::write_presentations(&self.parts)
    }

    fn __len__(&self) -> usize {
        self.parts.len()
    }

    /// `(source, period, entropy, mme, recurrence)` for every component.
    fn components(&self) -> PyResult<Vec<(String, u64, f64, bool, String)>> {
        let s = shiftclass_core::summarize_all(&self.parts).map_err(py_err)?;
        Ok(s.into_iter()
            .map(|c| (c.source, c.period, c.entropy.approx(), c.mme, c.recurrence.to_string()))
            .collect())
    }

    #[pyo3(signature = (tol = DEFAULT_TOL))]
    fn invariants(&self, tol: f64) -> PyResult<Invariants> {
        let s = shiftclass_core::summarize_all(&self.parts).map_err(py_err)?;
        Ok(Invariants { pair: compute_u_eta(&s, tol).map_err(py_err)?, tol })
    }

    fn __repr__(&self) -> String {
        let kinds: Vec<&str> = self.parts.iter().map(|p| p.kind()).collect();
        format!("Presentation([{}])", kinds.join(", "))
    }
}

/// The canonical invariant pair `(u, eta)`.
#[pyclass(frozen)]
struct Invariants {
    pair: InvariantPair,
    tol: f64,
}

#[pymethods]
impl Invariants {
    #[staticmethod]
    #[pyo3(signature = (text, tol = DEFAULT_TOL))]
    fn parse(text: &str, tol: f64) -> PyResult<Self> {
        Ok(Invariants { pair: doc::parse_invariants(text, tol).map_err(py_err)?, tol })
    }

    fn to_doc(&self) -> String {
        doc::write_invariants(&self.pair)
    }

    /// `(p, entropy, count)` with `count = None` for an unattained supremum.
    fn generators(&self) -> Vec<(u64, f64, Option<u64>)> {
        self.pair
            .generators()
            .iter()
            .map(|g| {
                let c = match g.count {
                    shiftclass_core::GenCount::Count(n) => Some(n),
                    shiftclass_core::GenCount::Unattained => None,
                };
                (g.p, g.h.approx(), c)
            })
            .collect()
    }

    fn u_bar(&self, p: u64) -> PyResult<f64> {
        Ok(self.pair.u_bar(p, self.tol).map_err(py_err)?.approx())
    }

    fn eta_bar(&self, p: u64) -> u64 {
        self.pair.eta_bar(p)
    }

    fn realize(&self) -> PyResult<Presentation> {
        Ok(Presentation { parts: shiftclass_core::realize_invariants(&self.pair).map_err(py_err)? })
    }

    /// `None` when isomorphic, else the witnessing period.
    #[pyo3(signature = (other, tol = None))]
    fn witness(&self, other: &Invariants, tol: Option<f64>) -> PyResult<Option<u64>> {
        let v = shiftclass_core::decide_almost_borel_iso(&self.pair, &other.pair, tol.unwrap_or(self.tol))
            .map_err(py_err)?;
        Ok(v.witness.map(|w| w.p))
    }

    fn __eq__(&self, other: &Invariants) -> PyResult<bool> {
        Ok(self.witness(other, None)?.is_none())
    }

    fn __repr__(&self) -> String {
        format!("Invariants({:?})", self.to_doc().trim_end())
    }
}

/// A one-block code from a labeled graph document.
#[pyclass(frozen)]
struct Code {
    code: BlockCode,
}

#[pymethods]
impl Code {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Code { code: doc::parse_code(text).map_err(py_err)? })
    }

    fn to_doc(&self) -> String {
        doc::write_code(&self.code)
    }

    fn minimal_relation(&self) -> Vec<(String, String)> {
        factor::minimal_relation(&self.code).pairs().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    /// `(ok, reason)`: reason is `None` when the relation is of Bowen type.
    #[pyo3(signature = (pairs = None))]
    fn bowen(&self, pairs: Option<Vec<(String, String)>>) -> PyResult<(bool, Option<String>)> {
        let rel = match pairs {
            Some(p) => shiftclass_core::SymbolRelation::from_pairs(&p),
            None => factor::minimal_relation(&self.code),
        };
        let v = factor::verify_bowen_relation(&self.code, &rel).map_err(py_err)?;
        let reason = v.failure.map(|f| match f {
            BowenFailure::UnequalLabels { .. } => format!("unequal labels: {f}"),
            BowenFailure::UnrelatedPair { .. } => format!("unrelated pair: {f}"),
        });
        Ok((v.bowen, reason))
    }

    fn is_injective(&self) -> bool {
        factor::check_injective(&self.code, &self.code.whole()).injective
    }

    fn is_finite_to_one(&self) -> bool {
        factor::check_finite_to_one(&self.code).0
    }

    /// Injective subsystem above `entropy`; returns `(report, graph document)`.
    #[pyo3(signature = (entropy, tol = DEFAULT_TOL))]
    fn embed(&self, entropy: &str, tol: f64) -> PyResult<(String, String)> {
        let target = doc::parse_entropy(entropy).map_err(py_err)?;
        let cert = markers::synthesize_injective_subsystem(&self.code, &target, &Budget::default(), tol)
            .map_err(py_err)?;
        let g = ShiftPresentation::FiniteGraph(cert.subsystem.graph.clone());
        Ok((cert.report(&self.code), doc::write_presentation(&g)))
    }
}

/// Entropy of every component of a presentation document, largest first.
#[pyfunction]
fn entropies(text: &str) -> PyResult<Vec<f64>> {
    let p = Presentation::new(text)?;
    let mut h: Vec<f64> = p.components()?.into_iter().map(|c| c.2).collect();
    h.sort_by(|a, b| b.total_cmp(a));
    Ok(h)
}

/// Are two presentation documents almost-Borel isomorphic?
#[pyfunction]
#[pyo3(signature = (a, b, tol = DEFAULT_TOL))]
fn isomorphic(a: &str, b: &str, tol: f64) -> PyResult<bool> {
    let ia = Presentation::new(a)?.invariants(tol)?;
    let ib = Presentation::new(b)?.invariants(tol)?;
    Ok(ia.witness(&ib, Some(tol))?.is_none())
}

/// Build and certify a pathology truncation over a list of binary words;
/// returns `(passed, report)`.
#[pyfunction]
#[pyo3(signature = (words, epsilon, depth, l_max = 40, max_m = 64))]
fn pathology_report(words: Vec<String>, epsilon: f64, depth: usize, l_max: usize, max_m: usize) -> PyResult<(bool, String)> {
    let y = Language::from_words(&words, depth).map_err(py_err)?;
    let n_seq: Vec<usize> = (1..=depth).collect();
    let spec: PathologySpec = pathology::search_parameters(&y, epsilon, &n_seq, depth, max_m).map_err(py_err)?;
    let pg = pathology::build_pathology_graph(&y, &spec).map_err(py_err)?;
    let r = pathology::certify_pathology(&pg, &y, &spec, l_max);
    Ok((r.passed(), r.render(&spec)))
}

#[pymodule]
fn shiftclass(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Presentation>()?;
    m.add_class::<Invariants>()?;
    m.add_class::<Code>()?;
    m.add_function(wrap_pyfunction!(entropies, m)?)?;
    m.add_function(wrap_pyfunction!(isomorphic, m)?)?;
    m.add_function(wrap_pyfunction!(pathology_report, m)?)?;
    m.add("Inconclusive", m.py().get_type::<Inconclusive>())?;
    m.add("DEFAULT_TOL", DEFAULT_TOL)?;
    Ok(())
}
