//! Python bindings: load or generate a corpus, cluster it, score the result.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use histlink_core::eval::{self, AppearanceRange, GenParams, Truth};
use histlink_core::io::{self, IngestReport, RoleMap};
use histlink_core::metrics::{self, SimilarityScore};
use histlink_core::normalize::AliasTable;
use histlink_core::{
    cluster_corpus, cluster_corpus_explained, Corpus, MatchConfig, MatchDecision, NameMetric, RecordId, RecordSet,
    RoleRuleSet,
};

create_exception!(histlink, HistlinkError, PyException);

fn err(e: histlink_core::Error) -> PyErr {
    HistlinkError::new_err(e.to_string())
}

fn score_arg(name: &str, v: f64) -> PyResult<SimilarityScore> {
    SimilarityScore::new(v).ok_or_else(|| PyValueError::new_err(format!("{name} must be in [0, 1], got {v}")))
}

/// Matcher settings. Defaults follow the command line tool.
#[pyclass(name = "MatchConfig", module = "histlink", frozen)]
struct PyMatchConfig {
    inner: MatchConfig,
}

#[pymethods]
impl PyMatchConfig {
    #[new]
    #[pyo3(signature = (
        *,
        window_years = histlink_core::model::DEFAULT_WINDOW_YEARS,
        name_threshold = histlink_core::model::DEFAULT_NAME_THRESHOLD,
        location_threshold = histlink_core::model::DEFAULT_LOCATION_THRESHOLD,
        relationship_required = false,
        min_relationship_support = histlink_core::model::DEFAULT_MIN_RELATIONSHIP_SUPPORT,
        name_metric = "jaro_winkler",
        fuzzy_keys = false,
        missing_location_matches = true,
        rules = None,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        window_years: u32,
        name_threshold: f64,
        location_threshold: f64,
        relationship_required: bool,
        min_relationship_support: u32,
        name_metric: &str,
        fuzzy_keys: bool,
        missing_location_matches: bool,
        rules: Option<PathBuf>,
    ) -> PyResult<Self> {
        let role_rules = match rules {
            Some(p) => RoleRuleSet::from_path(&p).map_err(err)?,
            None => RoleRuleSet::builtin(),
        };
        let inner = MatchConfig {
            name_metric: name_metric.parse::<NameMetric>().map_err(err)?,
            name_threshold: score_arg("name_threshold", name_threshold)?,
            location_threshold: score_arg("location_threshold", location_threshold)?,
            window_years,
            min_relationship_support,
            relationship_required,
            role_rules: Arc::new(role_rules),
            missing_location_matches,
            fuzzy_keys,
            ..MatchConfig::default()
        };
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn window_years(&self) -> u32 {
        self.inner.window_years
    }

    #[getter]
    fn name_threshold(&self) -> f64 {
        self.inner.name_threshold.value()
    }

    #[getter]
    fn location_threshold(&self) -> f64 {
        self.inner.location_threshold.value()
    }

    #[getter]
    fn relationship_required(&self) -> bool {
        self.inner.relationship_required
    }

    #[getter]
    fn fuzzy_keys(&self) -> bool {
        self.inner.fuzzy_keys
    }

    /// Rule ids in evaluation order.
    #[getter]
    fn rule_ids(&self) -> Vec<String> {
        self.inner.role_rules.rules().iter().map(|r| r.id.clone()).collect()
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "MatchConfig(window_years={}, name_threshold={}, location_threshold={}, relationship_required={}, fuzzy_keys={})",
            c.window_years,
            c.name_threshold.value(),
            c.location_threshold.value(),
            if c.relationship_required { "True" } else { "False" },
            if c.fuzzy_keys { "True" } else { "False" },
        )
    }
}

/// A validated, normalized corpus of events and person mentions.
#[pyclass(name = "Corpus", module = "histlink", frozen)]
struct PyCorpus {
    inner: Arc<Corpus>,
}

fn quarantine_rows<'py>(py: Python<'py>, report: &IngestReport) -> PyResult<Vec<Bound<'py, PyDict>>> {
    report
        .quarantined
        .iter()
        .map(|q| {
            let d = PyDict::new(py);
            d.set_item("file", q.file)?;
            d.set_item("line", q.line)?;
            d.set_item("id", &q.id)?;
            d.set_item("reason", &q.reason)?;
            Ok(d)
        })
        .collect()
}

#[pymethods]
impl PyCorpus {
    /// Loads `events.csv` and `persons.csv`. Returns the corpus and the
    /// quarantined rows.
    #[staticmethod]
    #[pyo3(signature = (events, persons, aliases = None, role_map = None))]
    fn load<'py>(
        py: Python<'py>,
        events: PathBuf,
        persons: PathBuf,
        aliases: Option<PathBuf>,
        role_map: Option<PathBuf>,
    ) -> PyResult<(Self, Vec<Bound<'py, PyDict>>)> {
        let (corpus, report) =
            io::load_corpus(&events, &persons, aliases.as_deref(), role_map.as_deref()).map_err(err)?;
        Ok((Self { inner: Arc::new(corpus) }, quarantine_rows(py, &report)?))
    }

    /// Same as `load`, from CSV text.
    #[staticmethod]
    fn from_csv<'py>(py: Python<'py>, events: &str, persons: &str) -> PyResult<(Self, Vec<Bound<'py, PyDict>>)> {
        let (corpus, report) =
            io::load_corpus_from_readers(events.as_bytes(), persons.as_bytes(), &AliasTable::new(), &RoleMap::new())
                .map_err(err)?;
        Ok((Self { inner: Arc::new(corpus) }, quarantine_rows(py, &report)?))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn record_ids(&self) -> Vec<String> {
        self.inner.persons().iter().map(|p| p.record_id.as_str().to_owned()).collect()
    }

    /// One mention with its event, as normalized at load time.
    fn person<'py>(&self, py: Python<'py>, record_id: &str) -> PyResult<Bound<'py, PyDict>> {
        let p =
            self.inner.person(&RecordId::from(record_id)).ok_or_else(|| PyKeyError::new_err(record_id.to_owned()))?;
        let e = self.inner.event_of(p);
        let d = PyDict::new(py);
        d.set_item("record_id", p.record_id.as_str())?;
        d.set_item("event_id", p.event_id.as_str())?;
        d.set_item("first_name", p.first_name.as_str())?;
        d.set_item("last_name", p.last_name.as_str())?;
        d.set_item("role", p.role.label())?;
        d.set_item("event_type", e.event_type.label())?;
        d.set_item("date", e.date.to_string())?;
        d.set_item("location", e.location.as_str())?;
        Ok(d)
    }

    /// Writes `events.csv` and `persons.csv` into `out_dir`.
    fn write(&self, out_dir: PathBuf) -> PyResult<()> {
        io::write_corpus(&self.inner, &out_dir).map_err(err)?;
        Ok(())
    }

    fn __repr__(&self) -> String {
        format!("Corpus({} records, {} events)", self.inner.len(), self.inner.events().len())
    }
}

fn config_or_default(config: Option<&Bound<'_, PyMatchConfig>>) -> MatchConfig {
    config.map(|c| c.get().inner.clone()).unwrap_or_default()
}

type SetLists = Vec<Vec<String>>;

fn set_lists(sets: Vec<RecordSet>) -> SetLists {
    sets.into_iter().map(|s| s.members.into_iter().map(|m| m.as_str().to_owned()).collect()).collect()
}

fn decision_dict<'py>(py: Python<'py>, d: &MatchDecision) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("record_a", d.record_a.as_str())?;
    out.set_item("record_b", d.record_b.as_str())?;
    out.set_item("matched", d.matched)?;
    out.set_item("name_score", d.name_score.value())?;
    out.set_item("date_ok", d.date_ok)?;
    out.set_item("location_ok", d.location_ok)?;
    out.set_item("relationship_support", d.relationship_support)?;
    out.set_item("role_veto", d.role_veto.as_deref())?;
    Ok(out)
}

/// Record sets as sorted lists of record ids, ordered by their first id.
#[pyfunction]
#[pyo3(signature = (corpus, config = None))]
fn cluster(
    py: Python<'_>,
    corpus: &Bound<'_, PyCorpus>,
    config: Option<&Bound<'_, PyMatchConfig>>,
) -> Vec<Vec<String>> {
    let corpus = Arc::clone(&corpus.get().inner);
    let config = config_or_default(config);
    set_lists(py.detach(move || cluster_corpus(&corpus, &config)))
}

/// Like `cluster`, also returning a decision dict for every compared pair.
#[pyfunction]
#[pyo3(signature = (corpus, config = None))]
fn cluster_explained<'py>(
    py: Python<'py>,
    corpus: &Bound<'py, PyCorpus>,
    config: Option<&Bound<'py, PyMatchConfig>>,
) -> PyResult<(SetLists, Vec<Bound<'py, PyDict>>)> {
    let corpus = Arc::clone(&corpus.get().inner);
    let config = config_or_default(config);
    let (sets, decisions) = py.detach(move || cluster_corpus_explained(&corpus, &config));
    let decisions = decisions.iter().map(|d| decision_dict(py, d)).collect::<PyResult<_>>()?;
    Ok((set_lists(sets), decisions))
}

fn lookup<'c>(corpus: &'c Corpus, id: &str) -> PyResult<&'c histlink_core::PersonRecord> {
    corpus.person(&RecordId::from(id)).ok_or_else(|| PyKeyError::new_err(id.to_owned()))
}

/// Full pairwise decision for two records of the corpus.
#[pyfunction]
#[pyo3(signature = (corpus, record_a, record_b, config = None))]
fn records_match<'py>(
    py: Python<'py>,
    corpus: &Bound<'py, PyCorpus>,
    record_a: &str,
    record_b: &str,
    config: Option<&Bound<'py, PyMatchConfig>>,
) -> PyResult<Bound<'py, PyDict>> {
    let c = &corpus.get().inner;
    let d = histlink_core::records_match(lookup(c, record_a)?, lookup(c, record_b)?, c, &config_or_default(config));
    decision_dict(py, &d)
}

/// Distinct names shared by the events of two records.
#[pyfunction]
fn relationship_support(corpus: &Bound<'_, PyCorpus>, record_a: &str, record_b: &str) -> PyResult<u32> {
    let c = &corpus.get().inner;
    histlink_core::relationship_support(lookup(c, record_a)?, lookup(c, record_b)?, c).map_err(err)
}

/// Synthetic corpus with ground truth. Returns `(corpus, truth)` where
/// `truth` maps record id to individual id. Locations come back resolved
/// through the generated alias table; `out_dir` receives the raw files.
#[pyfunction]
#[pyo3(signature = (
    *,
    n_individuals = 1000,
    families = None,
    events_min = 0,
    events_max = 2,
    typo_rate = 0.0,
    location_alias_rate = 0.0,
    date_jitter_years = 0,
    duplicate_name_rate = 0.0,
    death_rate = 0.5,
    second_generation = true,
    seed = 0,
    out_dir = None,
))]
#[allow(clippy::too_many_arguments)]
fn generate(
    n_individuals: usize,
    families: Option<usize>,
    events_min: u32,
    events_max: u32,
    typo_rate: f64,
    location_alias_rate: f64,
    date_jitter_years: u32,
    duplicate_name_rate: f64,
    death_rate: f64,
    second_generation: bool,
    seed: u64,
    out_dir: Option<PathBuf>,
) -> PyResult<(PyCorpus, HashMap<String, String>)> {
    let params = GenParams {
        n_individuals,
        families: families.unwrap_or((n_individuals / 4).max(1)),
        events_per_individual: AppearanceRange { min: events_min, max: events_max },
        typo_rate,
        location_alias_rate,
        date_jitter_years,
        duplicate_name_rate,
        death_rate,
        second_generation,
        seed,
    };
    let g = eval::generate_corpus(&params).map_err(err)?;
    if let Some(dir) = out_dir {
        g.write(&dir).map_err(err)?;
    }
    let truth = g.truth.entries().into_iter().map(|(r, i)| (r.as_str().to_owned(), i.to_owned())).collect();
    Ok((PyCorpus { inner: Arc::new(g.resolved_corpus()) }, truth))
}

/// Pairwise precision and recall of `sets` against `truth`.
#[pyfunction]
fn score<'py>(py: Python<'py>, sets: Vec<Vec<String>>, truth: HashMap<String, String>) -> PyResult<Bound<'py, PyDict>> {
    let truth = Truth::from_pairs(truth.into_iter().map(|(r, i)| (RecordId::new(r), i))).map_err(err)?;
    let mut record_sets = Vec::with_capacity(sets.len());
    for s in sets {
        if s.is_empty() {
            return Err(PyValueError::new_err("empty record set"));
        }
        record_sets.push(RecordSet::from_members(s.into_iter().map(RecordId::new).collect()));
    }
    let r = eval::score(&record_sets, &truth).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("pairs_predicted", r.pairs_predicted)?;
    d.set_item("true_matches", r.true_matches)?;
    d.set_item("false_matches", r.false_matches)?;
    d.set_item("precision", r.precision)?;
    d.set_item("recall", r.recall)?;
    d.set_item("true_pairs", r.true_pairs)?;
    Ok(d)
}

#[pyfunction]
fn normalize_name(raw: &str) -> String {
    histlink_core::normalize_name(raw).into_string()
}

/// Canonical `YYYY[-MM[-DD]]` form of a date.
#[pyfunction]
fn parse_date(raw: &str) -> PyResult<String> {
    histlink_core::parse_date(raw).map(|d| d.to_string()).map_err(err)
}

#[pyfunction]
fn levenshtein(a: &str, b: &str) -> usize {
    metrics::levenshtein(a, b)
}

#[pyfunction]
fn damerau_levenshtein(a: &str, b: &str) -> usize {
    metrics::damerau_levenshtein(a, b)
}

#[pyfunction]
fn jaro(a: &str, b: &str) -> f64 {
    metrics::jaro(a, b).value()
}

#[pyfunction]
fn jaro_winkler(a: &str, b: &str) -> f64 {
    metrics::jaro_winkler(a, b).value()
}

#[pyfunction]
fn normalized_edit_similarity(a: &str, b: &str) -> f64 {
    metrics::normalized_edit_similarity(a, b).value()
}

/// Module initializer; also usable to embed the module in a Rust host.
#[pymodule]
pub fn histlink(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HistlinkError", m.py().get_type::<HistlinkError>())?;
    m.add_class::<PyMatchConfig>()?;
    m.add_class::<PyCorpus>()?;
    m.add_function(wrap_pyfunction!(cluster, m)?)?;
    m.add_function(wrap_pyfunction!(cluster_explained, m)?)?;
    m.add_function(wrap_pyfunction!(records_match, m)?)?;
    m.add_function(wrap_pyfunction!(relationship_support, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_name, m)?)?;
    m.add_function(wrap_pyfunction!(parse_date, m)?)?;
    m.add_function(wrap_pyfunction!(levenshtein, m)?)?;
    m.add_function(wrap_pyfunction!(damerau_levenshtein, m)?)?;
    m.add_function(wrap_pyfunction!(jaro, m)?)?;
    m.add_function(wrap_pyfunction!(jaro_winkler, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_edit_similarity, m)?)?;
    Ok(())
}
