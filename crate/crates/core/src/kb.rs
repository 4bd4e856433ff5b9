//! Append-only knowledge base of per-paper fact bundles, with derived
//! aggregate tables and a structured query interface.
//!
//! On disk the KB is UTF-8 JSON lines: a header line
//! `{"format":"litsynth-kb","version":1}` followed by one
//! `{"record": ..., "facts": ...}` object per paper, sorted by canonical id.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extract::{FactBundle, HyperValue, HyperparamName, Metric, Split};
use crate::ingest::{PaperRecord, PaperStatus};
use crate::text::canonical_number;

pub const FORMAT_NAME: &str = "litsynth-kb";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("conflicting content for {id}: stored {existing}, incoming {incoming}")]
    Conflict {
        id: String,
        existing: String,
        incoming: String,
    },
    #[error("{path}: line {line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: unsupported KB header: {found}")]
    Header { path: PathBuf, found: String },
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KbEntry {
    pub record: PaperRecord,
    pub facts: FactBundle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
}

/// One row of the model x dataset x metric table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub paper_id: String,
    /// The paper's architecture fact when present, otherwise its title.
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    pub metric: Metric,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub results: Vec<ResultRow>,
    /// Hyperparameter name to `(value, count)` pairs sorted by value.
    pub histograms: BTreeMap<String, Vec<(HyperValue, usize)>>,
}

fn value_order(a: &HyperValue, b: &HyperValue) -> std::cmp::Ordering {
    match (a, b) {
        (HyperValue::Number(x), HyperValue::Number(y)) => x.total_cmp(y),
        (HyperValue::Number(_), HyperValue::Text(_)) => std::cmp::Ordering::Less,
        (HyperValue::Text(_), HyperValue::Number(_)) => std::cmp::Ordering::Greater,
        (HyperValue::Text(x), HyperValue::Text(y)) => x.cmp(y),
    }
}

/// Rebuilds the tables from entries. Only extracted papers contribute.
pub fn aggregate_entries<'a>(entries: impl IntoIterator<Item = &'a KbEntry>) -> Aggregates {
    let mut results = Vec::new();
    let mut counts: BTreeMap<String, BTreeMap<String, (HyperValue, usize)>> = BTreeMap::new();
    for e in entries {
        if e.record.status != PaperStatus::Extracted {
            continue;
        }
        let model = e
            .facts
            .hyperparams_named(&HyperparamName::Architecture)
            .next()
            .map(|f| f.value.key())
            .unwrap_or_else(|| e.record.title.clone());
        for r in &e.facts.results {
            results.push(ResultRow {
                paper_id: e.record.canonical_id.clone(),
                model: model.clone(),
                dataset: r.dataset.clone(),
                metric: r.metric.clone(),
                value: r.value,
                split: r.split,
            });
        }
        for h in &e.facts.hyperparams {
            let slot = counts
                .entry(h.name.as_str().to_string())
                .or_default()
                .entry(h.value.key())
                .or_insert_with(|| (h.value.clone(), 0));
            slot.1 += 1;
        }
    }
    results.sort_by(|a, b| {
        (&a.paper_id, &a.metric, &a.dataset)
            .cmp(&(&b.paper_id, &b.metric, &b.dataset))
            .then(a.value.total_cmp(&b.value))
    });
    let histograms = counts
        .into_iter()
        .map(|(name, values)| {
            let mut pairs: Vec<(HyperValue, usize)> = values.into_values().collect();
            pairs.sort_by(|a, b| value_order(&a.0, &b.0));
            (name, pairs)
        })
        .collect();
    Aggregates { results, histograms }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Comparator {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparator::Lt => value < threshold,
            Comparator::Le => value <= threshold,
            Comparator::Eq => value == threshold,
            Comparator::Ge => value >= threshold,
            Comparator::Gt => value > threshold,
        }
    }
}

impl FromStr for Comparator {
    type Err = KbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "<" | "lt" => Comparator::Lt,
            "<=" | "≤" | "le" => Comparator::Le,
            "=" | "==" | "eq" => Comparator::Eq,
            ">=" | "≥" | "ge" => Comparator::Ge,
            ">" | "gt" => Comparator::Gt,
            other => return Err(KbError::InvalidQuery(format!("unknown comparator {other:?}"))),
        })
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Ge => ">=",
            Comparator::Gt => ">",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Query {
    /// Every fact with this hyperparameter name.
    FactsByName { name: String },
    /// Papers with a result for `metric` satisfying the comparison,
    /// optionally on one dataset.
    PapersByMetricThreshold {
        metric: String,
        comparator: Comparator,
        threshold: f64,
        dataset: Option<String>,
    },
    /// Value counts for one hyperparameter, most common first.
    ValueHistogram { name: String },
    /// Entries whose id or title contains the text (case-insensitive).
    FreeLookup { text: String },
}

impl Query {
    pub fn validate(&self) -> Result<(), KbError> {
        if let Query::PapersByMetricThreshold { threshold, .. } = self
            && !threshold.is_finite()
        {
            return Err(KbError::InvalidQuery("threshold must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "row", rename_all = "snake_case")]
pub enum QueryRow {
    Fact {
        paper_id: String,
        name: String,
        value: HyperValue,
        unit: Option<String>,
        surface: String,
    },
    Paper {
        paper_id: String,
        title: String,
        metric: Metric,
        value: f64,
        dataset: Option<String>,
    },
    Count { value: HyperValue, count: usize },
    Entry {
        paper_id: String,
        title: String,
        year: Option<i32>,
        status: PaperStatus,
        hyperparams: usize,
        results: usize,
        citations: usize,
    },
}

impl fmt::Display for QueryRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryRow::Fact { paper_id, name, value, unit, surface } => {
                write!(f, "{paper_id}\t{name}\t{value}")?;
                if let Some(u) = unit {
                    write!(f, "\t{u}")?;
                }
                write!(f, "\t{surface:?}")
            }
            QueryRow::Paper { paper_id, title, metric, value, dataset } => write!(
                f,
                "{paper_id}\t{metric}\t{}\t{}\t{title}",
                canonical_number(*value),
                dataset.as_deref().unwrap_or("-")
            ),
            QueryRow::Count { value, count } => write!(f, "{value}\t{count}"),
            QueryRow::Entry { paper_id, title, year, status, hyperparams, results, citations } => write!(
                f,
                "{paper_id}\t{}\t{status:?}\th={hyperparams} r={results} c={citations}\t{title}",
                year.map(|y| y.to_string()).unwrap_or_else(|| "-".into())
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AppendOutcome {
    Inserted,
    Unchanged,
    Replaced,
}

#[derive(Debug, Default)]
pub struct KnowledgeBase {
    entries: BTreeMap<String, KbEntry>,
    aggregates: OnceLock<Aggregates>,
}

impl Clone for KnowledgeBase {
    fn clone(&self) -> Self {
        Self {
            entries: self.entries.clone(),
            aggregates: OnceLock::new(),
        }
    }
}

impl PartialEq for KnowledgeBase {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

fn describe_difference(a: &KbEntry, b: &KbEntry) -> (String, String) {
    let fact_desc = |name: &str, span: crate::text::Span, surface: &str| {
        format!("{name} at {}..{} {surface:?}", span.start, span.end)
    };
    let ha = &a.facts.hyperparams;
    let hb = &b.facts.hyperparams;
    for i in 0..ha.len().max(hb.len()) {
        if ha.get(i) != hb.get(i) {
            let show = |f: Option<&crate::extract::HyperparamFact>| {
                f.map(|f| fact_desc(f.name.as_str(), f.span, &f.surface))
                    .unwrap_or_else(|| "no fact".into())
            };
            return (show(ha.get(i)), show(hb.get(i)));
        }
    }
    let ra = &a.facts.results;
    let rb = &b.facts.results;
    for i in 0..ra.len().max(rb.len()) {
        if ra.get(i) != rb.get(i) {
            let show = |f: Option<&crate::extract::ResultFact>| {
                f.map(|f| fact_desc(f.metric.as_str(), f.span, &f.surface))
                    .unwrap_or_else(|| "no fact".into())
            };
            return (show(ra.get(i)), show(rb.get(i)));
        }
    }
    let ca = &a.facts.citations;
    let cb = &b.facts.citations;
    for i in 0..ca.len().max(cb.len()) {
        if ca.get(i) != cb.get(i) {
            let show = |f: Option<&crate::extract::CitationLink>| {
                f.map(|f| fact_desc("citation", f.marker_span, &f.marker))
                    .unwrap_or_else(|| "no citation".into())
            };
            return (show(ca.get(i)), show(cb.get(i)));
        }
    }
    ("record/metadata".into(), "record/metadata".into())
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&KbEntry> {
        self.entries.get(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Entries in canonical-id order.
    pub fn entries(&self) -> impl Iterator<Item = &KbEntry> {
        self.entries.values()
    }

    /// Stores one paper. Re-appending identical content is a no-op; other
    /// content under an existing id is a conflict unless `overwrite` is set.
    pub fn append(&mut self, record: PaperRecord, facts: FactBundle, overwrite: bool) -> Result<AppendOutcome, KbError> {
        let id = record.canonical_id.clone();
        let incoming = KbEntry { record, facts };
        let outcome = match self.entries.get(&id) {
            Some(existing) if *existing == incoming => return Ok(AppendOutcome::Unchanged),
            Some(existing) if !overwrite => {
                let (existing, incoming) = describe_difference(existing, &incoming);
                return Err(KbError::Conflict { id, existing, incoming });
            }
            Some(_) => AppendOutcome::Replaced,
            None => AppendOutcome::Inserted,
        };
        self.entries.insert(id, incoming);
        self.aggregates = OnceLock::new();
        Ok(outcome)
    }

    /// Tables derived from entries, built on first use after a change.
    pub fn aggregate(&self) -> &Aggregates {
        self.aggregates.get_or_init(|| aggregate_entries(self.entries.values()))
    }

    pub fn query(&self, q: &Query) -> Result<Vec<QueryRow>, KbError> {
        q.validate()?;
        let extracted = || {
            self.entries
                .values()
                .filter(|e| e.record.status == PaperStatus::Extracted)
        };
        Ok(match q {
            Query::FactsByName { name } => {
                let name = HyperparamName::from(name.as_str());
                extracted()
                    .flat_map(|e| {
                        e.facts.hyperparams_named(&name).map(|f| QueryRow::Fact {
                            paper_id: e.record.canonical_id.clone(),
                            name: f.name.to_string(),
                            value: f.value.clone(),
                            unit: f.unit.clone(),
                            surface: f.surface.clone(),
                        })
                    })
                    .collect()
            }
            Query::PapersByMetricThreshold { metric, comparator, threshold, dataset } => {
                let metric = Metric::from(metric.to_lowercase());
                let mut rows: Vec<QueryRow> = self
                    .aggregate()
                    .results
                    .iter()
                    .filter(|r| r.metric == metric)
                    .filter(|r| dataset.as_ref().is_none_or(|d| r.dataset.as_ref() == Some(d)))
                    .filter(|r| comparator.holds(r.value, *threshold))
                    .map(|r| QueryRow::Paper {
                        paper_id: r.paper_id.clone(),
                        title: self.entries[&r.paper_id].record.title.clone(),
                        metric: r.metric.clone(),
                        value: r.value,
                        dataset: r.dataset.clone(),
                    })
                    .collect();
                rows.dedup();
                rows
            }
            Query::ValueHistogram { name } => {
                let mut pairs = self
                    .aggregate()
                    .histograms
                    .get(name.as_str())
                    .cloned()
                    .unwrap_or_default();
                pairs.sort_by(|a, b| b.1.cmp(&a.1).then(value_order(&a.0, &b.0)));
                pairs
                    .into_iter()
                    .map(|(value, count)| QueryRow::Count { value, count })
                    .collect()
            }
            Query::FreeLookup { text } => {
                let needle = text.to_lowercase();
                self.entries
                    .values()
                    .filter(|e| {
                        e.record.canonical_id.to_lowercase().contains(&needle)
                            || e.record.title.to_lowercase().contains(&needle)
                    })
                    .map(|e| QueryRow::Entry {
                        paper_id: e.record.canonical_id.clone(),
                        title: e.record.title.clone(),
                        year: e.record.year,
                        status: e.record.status,
                        hyperparams: e.facts.hyperparams.len(),
                        results: e.facts.results.len(),
                        citations: e.facts.citations.len(),
                    })
                    .collect()
            }
        })
    }

    /// Serialized form: header line plus one entry per line in id order.
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&Header {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
        })
        .expect("header serializes");
        out.push('\n');
        for e in self.entries.values() {
            out.push_str(&serde_json::to_string(e).expect("entry serializes"));
            out.push('\n');
        }
        out
    }

    /// Writes through a temporary file and renames it into place.
    pub fn persist(&self, path: &Path) -> Result<(), KbError> {
        let io = |e| KbError::Io {
            path: path.to_path_buf(),
            source: e,
        };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(io)?;
        }
        let tmp = path.with_extension("jsonl.tmp");
        let mut f = std::fs::File::create(&tmp).map_err(io)?;
        f.write_all(self.to_jsonl().as_bytes()).map_err(io)?;
        f.sync_all().map_err(io)?;
        std::fs::rename(&tmp, path).map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self, KbError> {
        let text = std::fs::read_to_string(path).map_err(|e| KbError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_jsonl(&text, path)
    }

    pub fn from_jsonl(text: &str, path: &Path) -> Result<Self, KbError> {
        let mut kb = Self::new();
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let Some((_, first)) = lines.next() else {
            return Ok(kb);
        };
        match serde_json::from_str::<Header>(first) {
            Ok(h) if h.format == FORMAT_NAME && h.version == FORMAT_VERSION => {}
            _ => {
                return Err(KbError::Header {
                    path: path.to_path_buf(),
                    found: first.chars().take(80).collect(),
                });
            }
        }
        for (i, line) in lines {
            let entry: KbEntry = serde_json::from_str(line).map_err(|e| KbError::Corrupt {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
            let id = entry.record.canonical_id.clone();
            if kb.entries.insert(id.clone(), entry).is_some() {
                return Err(KbError::Corrupt {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: format!("duplicate id {id}"),
                });
            }
        }
        Ok(kb)
    }
}

/// A knowledge base that parse workers append to concurrently.
#[derive(Debug, Default)]
pub struct SharedKb {
    inner: Mutex<KnowledgeBase>,
    overwrite: bool,
}

impl SharedKb {
    pub fn new(kb: KnowledgeBase, overwrite: bool) -> Self {
        Self {
            inner: Mutex::new(kb),
            overwrite,
        }
    }

    pub fn append(&self, record: PaperRecord, facts: FactBundle) -> Result<AppendOutcome, KbError> {
        self.inner
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .append(record, facts, self.overwrite)
    }

    pub fn into_inner(self) -> KnowledgeBase {
        self.inner.into_inner().unwrap_or_else(|p| p.into_inner())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SourceKind;
    use crate::extract::{HyperparamFact, ResultFact};
    use crate::text::Span;

    fn paper(id: &str, lr: f64, ppl: Option<(f64, &str)>) -> (PaperRecord, FactBundle) {
        let mut r = PaperRecord::new(SourceKind::LocalFile, format!("Paper {id}")).with_source_id(id);
        r.status = PaperStatus::Extracted;
        let mut f = FactBundle::default();
        f.hyperparams.push(HyperparamFact {
            name: HyperparamName::LearningRate,
            value: HyperValue::Number(lr),
            unit: None,
            span: Span::new(0, 5),
            surface: lr.to_string(),
        });
        if let Some((v, d)) = ppl {
            f.results.push(ResultFact {
                metric: Metric::Perplexity,
                value: v,
                dataset: Some(d.into()),
                split: Some(Split::Test),
                span: Span::new(10, 14),
                surface: v.to_string(),
            });
        }
        (r, f)
    }

    #[test]
    fn append_lookup_and_idempotency() {
        let mut kb = KnowledgeBase::new();
        let (r, f) = paper("a", 0.001, None);
        assert_eq!(kb.append(r.clone(), f.clone(), false).unwrap(), AppendOutcome::Inserted);
        assert_eq!(kb.get(&r.canonical_id).unwrap().facts, f);
        assert_eq!(kb.append(r.clone(), f.clone(), false).unwrap(), AppendOutcome::Unchanged);
        let (_, mut g) = paper("a", 0.002, None);
        g.hyperparams[0].span = Span::new(3, 8);
        let err = kb.append(r.clone(), g.clone(), false).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("0..5") && msg.contains("3..8"), "{msg}");
        assert_eq!(kb.append(r, g, true).unwrap(), AppendOutcome::Replaced);
    }

    #[test]
    fn histogram_and_threshold_query() {
        let mut kb = KnowledgeBase::new();
        for (id, lr, ppl) in [("a", 0.001, (18.3, "WikiText-103")), ("b", 0.001, (66.5, "WikiText-103")), ("c", 30.0, (54.5, "Penn Treebank"))] {
            let (r, f) = paper(id, lr, Some(ppl));
            kb.append(r, f, false).unwrap();
        }
        let hist = kb.query(&Query::ValueHistogram { name: "learning_rate".into() }).unwrap();
        assert_eq!(hist[0], QueryRow::Count { value: HyperValue::Number(0.001), count: 2 });
        let rows = kb
            .query(&Query::PapersByMetricThreshold {
                metric: "perplexity".into(),
                comparator: Comparator::Lt,
                threshold: 40.0,
                dataset: Some("WikiText-103".into()),
            })
            .unwrap();
        assert_eq!(rows.len(), 1);
        assert!(matches!(&rows[0], QueryRow::Paper { value, .. } if *value == 18.3));
        assert!(kb.query(&Query::FactsByName { name: "nonexistent".into() }).unwrap().is_empty());
        assert!(kb
            .query(&Query::PapersByMetricThreshold {
                metric: "perplexity".into(),
                comparator: Comparator::Lt,
                threshold: f64::NAN,
                dataset: None
            })
            .is_err());
    }

    #[test]
    fn aggregates_rebuild_after_append() {
        let mut kb = KnowledgeBase::new();
        let (r, f) = paper("a", 0.1, Some((10.0, "WikiText-2")));
        kb.append(r, f, false).unwrap();
        assert_eq!(kb.aggregate().results.len(), 1);
        let (r, f) = paper("b", 0.1, Some((12.0, "WikiText-2")));
        kb.append(r, f, false).unwrap();
        assert_eq!(kb.aggregate().results.len(), 2);
        assert_eq!(*kb.aggregate(), aggregate_entries(kb.entries()));
    }

    #[test]
    fn persistence_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kb.jsonl");
        let mut kb = KnowledgeBase::new();
        for id in ["z", "a", "m"] {
            let (r, f) = paper(id, 0.5, Some((1.5, "enwik8")));
            kb.append(r, f, false).unwrap();
        }
        kb.persist(&path).unwrap();
        assert_eq!(KnowledgeBase::load(&path).unwrap(), kb);

        let text = std::fs::read_to_string(&path).unwrap();
        let truncated = &text[..text.len() - 20];
        std::fs::write(&path, truncated).unwrap();
        match KnowledgeBase::load(&path) {
            Err(KbError::Corrupt { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        std::fs::write(&path, "").unwrap();
        assert!(KnowledgeBase::load(&path).unwrap().is_empty());
    }

    #[test]
    fn concurrent_appends() {
        let shared = SharedKb::new(KnowledgeBase::new(), false);
        let barrier = std::sync::Barrier::new(2);
        std::thread::scope(|s| {
            for id in ["x", "y"] {
                let (shared, barrier) = (&shared, &barrier);
                s.spawn(move || {
                    let (r, f) = paper(id, 0.1, None);
                    barrier.wait();
                    shared.append(r, f).unwrap();
                });
            }
        });
        let kb = shared.into_inner();
        assert_eq!(kb.ids().collect::<Vec<_>>(), vec!["local:x", "local:y"]);
    }
}
