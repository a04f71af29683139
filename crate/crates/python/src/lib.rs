//! Python bindings: `import planrec`.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use planrec::engine::{Session as CoreSession, SessionOptions};
use planrec::generator::{self, GenConfig, WorldModel};
use planrec::kb::{self, Severity};
use planrec::metrics;
use planrec::oracle;
use planrec::{Action, Change};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

#[pyclass(frozen)]
pub struct KnowledgeBase {
    inner: Arc<kb::KnowledgeBase>,
}

#[pymethods]
impl KnowledgeBase {
    /// Parses knowledge-base source text.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(KnowledgeBase {
            inner: Arc::new(kb::parse_kb(text).map_err(value_err)?),
        })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(value_err)?;
        Self::new(&text)
    }

    /// `(severity, message)` pairs; severity is "error" or "warning".
    fn validate(&self) -> Vec<(String, String)> {
        kb::validate_kb(&self.inner)
            .into_iter()
            .map(|d| {
                let sev = match d.severity {
                    Severity::Error => "error",
                    Severity::Warning => "warning",
                };
                (sev.to_string(), d.to_string())
            })
            .collect()
    }

    /// `(name, arity, is_primitive)` for every declared type.
    fn signatures(&self) -> Vec<(String, usize, bool)> {
        self.inner
            .signatures()
            .iter()
            .map(|s| (s.name.to_string(), s.arity, s.kind == kb::Kind::Primitive))
            .collect()
    }

    #[getter]
    fn schema_count(&self) -> usize {
        self.inner.schemas().len()
    }

    fn to_dsl(&self) -> String {
        self.inner.to_dsl()
    }
}

#[pyclass(frozen)]
pub struct Transcript {
    inner: planrec::Transcript,
}

#[pymethods]
impl Transcript {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Transcript {
            inner: planrec::Transcript::parse(text).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(value_err)?;
        Self::new(&text)
    }

    /// `(name, args)` for every step.
    #[getter]
    fn actions(&self) -> Vec<(String, Vec<String>)> {
        self.inner
            .steps
            .iter()
            .map(|s| {
                (
                    s.action.name.to_string(),
                    s.action.args.iter().map(|a| a.to_string()).collect(),
                )
            })
            .collect()
    }

    fn check(&self, kb: &KnowledgeBase) -> PyResult<()> {
        self.inner.check(&kb.inner).map_err(value_err)
    }

    fn to_sexp(&self) -> String {
        self.inner.to_sexp()
    }

    fn __len__(&self) -> usize {
        self.inner.steps.len()
    }
}

#[pyclass(frozen)]
pub struct Explanation {
    inner: planrec::Explanation,
}

#[pymethods]
impl Explanation {
    /// `(name, args, start, end)` for every top-level intention.
    #[getter]
    fn intents(&self) -> Vec<(String, Vec<String>, usize, usize)> {
        self.inner
            .intents
            .iter()
            .map(|i| {
                (
                    i.action_type.to_string(),
                    i.args.iter().map(|a| a.to_string()).collect(),
                    i.start,
                    i.end,
                )
            })
            .collect()
    }

    fn is_gapless(&self) -> bool {
        self.inner.is_gapless()
    }

    fn to_sexp(&self) -> String {
        self.inner.to_sexp()
    }

    fn __len__(&self) -> usize {
        self.inner.intents.len()
    }

    fn __repr__(&self) -> String {
        self.inner.to_sexp()
    }
}

/// An online recognition session fed one step at a time.
#[pyclass]
pub struct Session {
    inner: CoreSession,
}

#[pymethods]
impl Session {
    #[new]
    #[pyo3(signature = (kb, transcript=None, record_metrics=false))]
    fn new(
        kb: &KnowledgeBase,
        transcript: Option<&Transcript>,
        record_metrics: bool,
    ) -> PyResult<Self> {
        let init = transcript.map(|t| t.inner.init.clone()).unwrap_or_default();
        let opts = SessionOptions {
            record_metrics,
            ..SessionOptions::default()
        };
        Ok(Session {
            inner: CoreSession::new(Arc::clone(&kb.inner), init, opts).map_err(value_err)?,
        })
    }

    /// Ingests one action with its `(object, property, value)` changes.
    #[pyo3(signature = (name, args, changes=Vec::new()))]
    fn push_step(
        &mut self,
        name: &str,
        args: Vec<String>,
        changes: Vec<(String, String, String)>,
    ) -> PyResult<()> {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let changes: Vec<Change> = changes
            .iter()
            .map(|(o, p, v)| Change::new(o, p, v))
            .collect();
        self.inner
            .push_step(&Action::new(name, &args), &changes)
            .map_err(runtime_err)
    }

    /// Current most parsimonious explanation.
    fn explain(&mut self) -> PyResult<Explanation> {
        Ok(Explanation {
            inner: self.inner.finish().map_err(runtime_err)?,
        })
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps()
    }

    /// `(tick, living, total)` points of the living-memory curve.
    fn living_curve(&self) -> Vec<(u64, u64, u64)> {
        metrics::living_curve(self.inner.recorder().events())
            .into_iter()
            .map(|p| (p.tick, p.living, p.total))
            .collect()
    }
}

/// `(name, args)` of an action or intention.
type Named = (String, Vec<String>);

#[pyfunction]
fn explain(kb: &KnowledgeBase, transcript: &Transcript) -> PyResult<Explanation> {
    transcript.inner.check(&kb.inner).map_err(value_err)?;
    let ex = planrec::explain(
        Arc::clone(&kb.inner),
        transcript.inner.init.clone(),
        &transcript.inner.steps,
    )
    .map_err(runtime_err)?;
    Ok(Explanation { inner: ex })
}

/// Brute-force minimum cover size (demos up to 20 actions).
#[pyfunction]
fn min_cover_cardinality(kb: &KnowledgeBase, transcript: &Transcript) -> PyResult<Option<usize>> {
    oracle::min_cover_cardinality(&kb.inner, &transcript.inner.steps, &transcript.inner.init)
        .map_err(value_err)
}

#[pyfunction]
fn validate_cover(kb: &KnowledgeBase, transcript: &Transcript, explanation: &Explanation) -> bool {
    oracle::validate_cover(
        &kb.inner,
        &transcript.inner.steps,
        &transcript.inner.init,
        &explanation.inner,
    )
}

/// Generates a demonstration; returns the transcript and its ground-truth
/// top-level `(name, args)` list.
#[pyfunction]
#[pyo3(signature = (kb, world, seed, n_top))]
fn gen_demo(
    kb: &KnowledgeBase,
    world: &str,
    seed: u64,
    n_top: usize,
) -> PyResult<(Transcript, Vec<Named>)> {
    let world = Arc::new(WorldModel::parse(world).map_err(value_err)?);
    let demo =
        generator::gen_demo(&kb.inner, &GenConfig::new(seed, n_top, world)).map_err(runtime_err)?;
    let truth = demo
        .ground_truth
        .iter()
        .map(|a| {
            (
                a.name.to_string(),
                a.args.iter().map(|x| x.to_string()).collect(),
            )
        })
        .collect();
    Ok((
        Transcript {
            inner: demo.transcript(),
        },
        truth,
    ))
}

#[pymodule(name = "planrec")]
fn planrec_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<KnowledgeBase>()?;
    m.add_class::<Transcript>()?;
    m.add_class::<Explanation>()?;
    m.add_class::<Session>()?;
    m.add_function(wrap_pyfunction!(explain, m)?)?;
    m.add_function(wrap_pyfunction!(min_cover_cardinality, m)?)?;
    m.add_function(wrap_pyfunction!(validate_cover, m)?)?;
    m.add_function(wrap_pyfunction!(gen_demo, m)?)?;
    Ok(())
}
