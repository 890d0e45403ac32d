//! Python bindings. Structured values cross the boundary as plain Python
//! dicts and lists (through JSON), so the Python side sees exactly the
//! documents the HTTP service and the CLI's machine format produce.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyKeyError, PyOSError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;
use yogyata_core::analyzer::{AnalysisError, SentenceInput};
use yogyata_core::rulestore::RuleDraft;
use yogyata_core::{seed, Analyzer, KarakaRole, Mode, Resources, RuleId, RuleStore, Scheme, StoreError};

create_exception!(yogyata, YogyataError, PyValueError, "A rule or analysis request the engine rejected.");
create_exception!(
    yogyata,
    NoAnalysisError,
    YogyataError,
    "Every candidate analysis was pruned; `args[1]` holds the prune report."
);

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: serde::de::DeserializeOwned>(value: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = match value.extract::<String>() {
        Ok(s) => s,
        Err(_) => value.py().import("json")?.call_method1("dumps", (value,))?.extract()?,
    };
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn store_err(e: StoreError) -> PyErr {
    match e.root_cause() {
        StoreError::NotFound { .. } => PyKeyError::new_err(e.to_string()),
        StoreError::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => YogyataError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr>(what: &str, text: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    text.parse().map_err(|e| PyValueError::new_err(format!("{what}: {e}")))
}

/// Resources, a rule store and an analyzer bundled together.
#[pyclass(frozen)]
pub struct Engine {
    resources: Resources,
    store: RuleStore,
    analyzer: Analyzer,
}

#[pymethods]
impl Engine {
    /// An in-memory engine over the bundled seed data. Nothing is persisted.
    #[staticmethod]
    fn seeded() -> PyResult<Self> {
        let resources = seed::resources();
        let store = RuleStore::in_memory(resources.lexicon.clone());
        store.import_rules(seed::RULES).map_err(store_err)?;
        Ok(Engine::from_parts(resources, store))
    }

    /// Opens a data directory as written by `yogyata seed`. Rule edits are
    /// journaled there.
    #[staticmethod]
    fn open(data_dir: PathBuf) -> PyResult<Self> {
        let resources = Resources::load_dir(&data_dir).map_err(|e| PyOSError::new_err(e.to_string()))?;
        let store = resources.open_store(&data_dir).map_err(store_err)?;
        Ok(Engine::from_parts(resources, store))
    }

    #[pyo3(signature = (sentence, mode = "permissive"))]
    fn analyze<'py>(&self, py: Python<'py>, sentence: &Bound<'py, PyAny>, mode: &str) -> PyResult<Bound<'py, PyAny>> {
        let sentence: SentenceInput = from_py(sentence)?;
        let mode: Mode = parse("mode", mode)?;
        match self.analyzer.disambiguate(&sentence, &self.store.snapshot(), mode) {
            Ok(d) => to_py(py, &d),
            Err(AnalysisError::NoAnalysis(report)) => {
                let report = to_py(py, &report)?.unbind();
                Err(NoAnalysisError::new_err(("every candidate analysis was pruned".to_string(), report)))
            }
            Err(e) => Err(YogyataError::new_err(e.to_string())),
        }
    }

    fn enumerate_hypotheses<'py>(&self, py: Python<'py>, sentence: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let sentence: SentenceInput = from_py(sentence)?;
        let hyps = self
            .analyzer
            .enumerate_hypotheses(&sentence)
            .map_err(|e| YogyataError::new_err(e.to_string()))?;
        to_py(py, &hyps)
    }

    fn enumerate_analyses<'py>(&self, py: Python<'py>, sentence: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let sentence: SentenceInput = from_py(sentence)?;
        let all = self
            .analyzer
            .enumerate_analyses(&sentence)
            .map_err(|e| YogyataError::new_err(e.to_string()))?;
        to_py(py, &all)
    }

    /// `draft` is a dict with `dhatu`, `headword`, `sense_id`, `roles` and
    /// optionally `prefix`, `sandhi_form`, `changed_artha`, `comment`.
    fn create_rule<'py>(&self, py: Python<'py>, draft: &Bound<'py, PyAny>, annotator: &str) -> PyResult<Bound<'py, PyAny>> {
        let draft: RuleDraft = from_py(draft)?;
        let rule = self.store.create_rule(draft, annotator).map_err(store_err)?;
        to_py(py, &rule)
    }

    #[pyo3(signature = (l_word = None, headword = None))]
    fn rules<'py>(&self, py: Python<'py>, l_word: Option<&str>, headword: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.store.get_rules(l_word, headword))
    }

    fn delete_rule<'py>(&self, py: Python<'py>, id: &str, annotator: &str) -> PyResult<Bound<'py, PyAny>> {
        let tombstone = self.store.delete_rule(&RuleId(id.to_string()), annotator).map_err(store_err)?;
        to_py(py, &tombstone)
    }

    fn relations<'py>(&self, py: Python<'py>, headword: &str) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.store.relations_for_lexeme(headword).map_err(store_err)?)
    }

    fn dhatus_for_karaka<'py>(&self, py: Python<'py>, role: &str) -> PyResult<Bound<'py, PyAny>> {
        let role: KarakaRole = parse("role", role)?;
        to_py(py, &self.store.dhatus_for_karaka(role))
    }

    fn export_rules(&self) -> String {
        self.store.export_rules()
    }

    fn __len__(&self) -> usize {
        self.store.active_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "Engine(dhatus={}, headwords={}, rules={})",
            self.resources.lexicon.dhatus().count(),
            self.resources.lexicon.lexemes().count(),
            self.store.active_count()
        )
    }
}

impl Engine {
    fn from_parts(resources: Resources, store: RuleStore) -> Self {
        let analyzer = resources.analyzer();
        Engine {
            resources,
            store,
            analyzer,
        }
    }
}

/// Transliterates between `iast`, `slp1` and `devanagari`. Returns the text
/// and the characters the source scheme did not define.
#[pyfunction]
#[pyo3(signature = (text, source = "iast", target = "slp1"))]
fn transliterate<'py>(py: Python<'py>, text: &str, source: &str, target: &str) -> PyResult<Bound<'py, PyAny>> {
    let from: Scheme = parse("source", source)?;
    let to: Scheme = parse("target", target)?;
    to_py(py, &yogyata_core::transliterate(text, from, to))
}

/// The bundled example sentences by name.
#[pyfunction]
fn example_sentence<'py>(py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyAny>> {
    let s = seed::sentence(name).ok_or_else(|| PyKeyError::new_err(name.to_string()))?;
    to_py(py, &s)
}

#[pymodule]
fn yogyata(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Engine>()?;
    m.add_function(wrap_pyfunction!(transliterate, m)?)?;
    m.add_function(wrap_pyfunction!(example_sentence, m)?)?;
    m.add("YogyataError", m.py().get_type::<YogyataError>())?;
    m.add("NoAnalysisError", m.py().get_type::<NoAnalysisError>())?;
    m.add(
        "EXAMPLE_SENTENCES",
        seed::SENTENCES.iter().map(|(n, _)| *n).collect::<Vec<_>>(),
    )?;
    Ok(())
}
