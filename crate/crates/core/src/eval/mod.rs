//! Precision/recall/F1 against gold annotations, plus the ablation and
//! scaling harnesses.

mod bench;
mod memory;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extract::FactBundle;
use crate::ingest::PaperStatus;
use crate::kb::{KbEntry, KnowledgeBase};
use crate::text::canonical_number;

pub use bench::{
    AblationConfig, AblationRow, LinearFit, REFERENCE_MEMORY_MODEL, REFERENCE_TIME_MODEL, ScalingMeasurement,
    ScalingReport, ablation_table, linear_fit, run_ablation, run_scaling, scaling_table,
};
pub use memory::{MemorySampler, current_rss_bytes, reset_peak};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold ids missing from the knowledge base: {}", .0.join(", "))]
    MissingIds(Vec<String>),
    #[error("{path}: line {line}: {message}")]
    Gold { path: PathBuf, line: usize, message: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("benchmark run failed: {0}")]
    Run(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Relevance,
    Hyperparams,
    Results,
    Citations,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::Relevance, Task::Hyperparams, Task::Results, Task::Citations];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Relevance => "relevance",
            Task::Hyperparams => "hyperparams",
            Task::Results => "results",
            Task::Citations => "citations",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The single item of a relevant paper under the relevance task.
pub const RELEVANT: &str = "relevant";

/// Precision, recall and F1 with their counts.
///
/// Conventions: P is 0 when nothing was extracted, R is 0 when the gold set
/// is empty, F1 is 0 when P + R is 0. The flags record which of these hit.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub tp: usize,
    pub extracted: usize,
    pub gold: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub empty_extraction: bool,
    pub empty_gold: bool,
}

impl Prf {
    pub fn from_counts(tp: usize, extracted: usize, gold: usize) -> Self {
        let precision = if extracted == 0 { 0.0 } else { tp as f64 / extracted as f64 };
        let recall = if gold == 0 { 0.0 } else { tp as f64 / gold as f64 };
        Self {
            tp,
            extracted,
            gold,
            precision,
            recall,
            f1: f1_score(precision, recall),
            empty_extraction: extracted == 0,
            empty_gold: gold == 0,
        }
    }

    /// Sums counts and recomputes the ratios (micro-average).
    pub fn pool<'a>(parts: impl IntoIterator<Item = &'a Prf>) -> Self {
        let (mut tp, mut e, mut g) = (0, 0, 0);
        for p in parts {
            tp += p.tp;
            e += p.extracted;
            g += p.gold;
        }
        Self::from_counts(tp, e, g)
    }

    /// Keeps the pooled counts but replaces the ratios with the unweighted
    /// mean over `parts` (macro-average). No parts leaves the pooled ratios.
    pub fn mean(mut pooled: Prf, parts: &[&Prf]) -> Self {
        if parts.is_empty() {
            return pooled;
        }
        let n = parts.len() as f64;
        pooled.precision = parts.iter().map(|p| p.precision).sum::<f64>() / n;
        pooled.recall = parts.iter().map(|p| p.recall).sum::<f64>() / n;
        pooled.f1 = parts.iter().map(|p| p.f1).sum::<f64>() / n;
        pooled
    }
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn compute_prf<T: Ord>(extracted: &BTreeSet<T>, gold: &BTreeSet<T>) -> Prf {
    let tp = extracted.intersection(gold).count();
    Prf::from_counts(tp, extracted.len(), gold.len())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldAnnotation {
    pub canonical_id: String,
    pub task: Task,
    pub items: BTreeSet<String>,
}

impl GoldAnnotation {
    pub fn new(canonical_id: impl Into<String>, task: Task, items: impl IntoIterator<Item = String>) -> Self {
        Self {
            canonical_id: canonical_id.into(),
            task,
            items: items.into_iter().collect(),
        }
    }

    /// Checks every item has the shape its task produces.
    pub fn validate(&self) -> Result<(), String> {
        for item in &self.items {
            let ok = match self.task {
                Task::Relevance => item == RELEVANT,
                Task::Hyperparams => item.split_once('=').is_some_and(|(n, v)| !n.is_empty() && !v.is_empty()),
                Task::Results => {
                    let parts: Vec<&str> = item.split('|').collect();
                    parts.len() == 3 && parts[1].parse::<f64>().is_ok()
                }
                Task::Citations => !item.trim().is_empty(),
            };
            if !ok {
                return Err(format!("item {item:?} does not fit task {}", self.task));
            }
        }
        Ok(())
    }
}

/// Reads line-delimited annotations. Items must be duplicate-free and fit
/// their task.
pub fn load_gold(path: &Path) -> Result<Vec<GoldAnnotation>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|e| EvalError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_gold(&text, path)
}

pub fn parse_gold(text: &str, origin: &Path) -> Result<Vec<GoldAnnotation>, EvalError> {
    #[derive(Deserialize)]
    struct Raw {
        canonical_id: String,
        task: Task,
        items: Vec<String>,
    }
    let err = |line: usize, message: String| EvalError::Gold {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: Raw = serde_json::from_str(line).map_err(|e| err(i + 1, e.to_string()))?;
        let n = raw.items.len();
        let ann = GoldAnnotation::new(raw.canonical_id, raw.task, raw.items);
        if ann.items.len() != n {
            return Err(err(i + 1, "duplicate items".into()));
        }
        ann.validate().map_err(|m| err(i + 1, m))?;
        if !seen.insert((ann.canonical_id.clone(), ann.task)) {
            return Err(err(i + 1, format!("second annotation for {} / {}", ann.canonical_id, ann.task)));
        }
        out.push(ann);
    }
    Ok(out)
}

pub fn write_gold(path: &Path, gold: &[GoldAnnotation]) -> Result<(), EvalError> {
    let mut out = String::new();
    for g in gold {
        out.push_str(&serde_json::to_string(g).expect("gold serializes"));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| EvalError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn hyperparam_items(facts: &FactBundle) -> BTreeSet<String> {
    facts
        .hyperparams
        .iter()
        .map(|h| format!("{}={}", h.name, h.value.key()))
        .collect()
}

pub fn result_item(metric: &str, value: f64, dataset: Option<&str>) -> String {
    format!("{metric}|{}|{}", canonical_number(value), dataset.unwrap_or("-"))
}

pub fn result_items(facts: &FactBundle) -> BTreeSet<String> {
    facts
        .results
        .iter()
        .map(|r| result_item(r.metric.as_str(), r.value, r.dataset.as_deref()))
        .collect()
}

/// Citations compare by the reference they resolve to; unresolved markers
/// keep their surface form.
pub fn citation_items(facts: &FactBundle) -> BTreeSet<String> {
    facts
        .citations
        .iter()
        .map(|c| match &c.resolved_key {
            Some(k) => k.clone(),
            None => format!("unresolved:{}", c.marker),
        })
        .collect()
}

/// The items the pipeline produced for one paper and task.
pub fn extracted_items(entry: &KbEntry, task: Task) -> BTreeSet<String> {
    match task {
        Task::Relevance => {
            if entry.record.status == PaperStatus::FilteredOut {
                BTreeSet::new()
            } else {
                BTreeSet::from([RELEVANT.to_string()])
            }
        }
        Task::Hyperparams => hyperparam_items(&entry.facts),
        Task::Results => result_items(&entry.facts),
        Task::Citations => citation_items(&entry.facts),
    }
}

/// Annotations that mirror the knowledge base exactly, for every task.
pub fn gold_from_kb(kb: &KnowledgeBase) -> Vec<GoldAnnotation> {
    kb.entries()
        .flat_map(|e| {
            Task::ALL
                .iter()
                .map(move |&t| GoldAnnotation::new(e.record.canonical_id.clone(), t, extracted_items(e, t)))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Counts summed over papers, then one ratio.
    #[default]
    Micro,
    /// Per-paper ratios averaged with equal weight.
    Macro,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub averaging: Averaging,
    pub papers: usize,
    pub tasks: BTreeMap<Task, Prf>,
}

impl EvalReport {
    /// All tasks pooled into one micro-averaged score.
    pub fn overall(&self) -> Prf {
        let pooled = Prf::pool(self.tasks.values());
        match self.averaging {
            Averaging::Micro => pooled,
            Averaging::Macro => Prf::mean(pooled, &self.tasks.values().collect::<Vec<_>>()),
        }
    }

    pub fn task(&self, task: Task) -> Option<&Prf> {
        self.tasks.get(&task)
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12} {:>9} {:>6} {:>6} {:>6} {:>5} {:>5} {:>5}", "task", "precision", "recall", "f1", "", "tp", "|E|", "|G|")?;
        let mut row = |name: &str, p: &Prf| {
            writeln!(
                f,
                "{:<12} {:>9.3} {:>6.3} {:>6.3} {:>6} {:>5} {:>5} {:>5}",
                name, p.precision, p.recall, p.f1, "", p.tp, p.extracted, p.gold
            )
        };
        for (t, p) in &self.tasks {
            row(t.as_str(), p)?;
        }
        row("overall", &self.overall())?;
        write!(f, "({} papers, {:?}-averaged)", self.papers, self.averaging)
    }
}

/// Scores the knowledge base against gold annotations, per task.
pub fn evaluate_corpus(gold: &[GoldAnnotation], kb: &KnowledgeBase, averaging: Averaging) -> Result<EvalReport, EvalError> {
    let missing: BTreeSet<String> = gold
        .iter()
        .filter(|g| kb.get(&g.canonical_id).is_none())
        .map(|g| g.canonical_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(EvalError::MissingIds(missing.into_iter().collect()));
    }
    let mut per_task: BTreeMap<Task, Vec<Prf>> = BTreeMap::new();
    let mut papers = BTreeSet::new();
    for g in gold {
        let entry = kb.get(&g.canonical_id).expect("checked above");
        let prf = compute_prf(&extracted_items(entry, g.task), &g.items);
        per_task.entry(g.task).or_default().push(prf);
        papers.insert(g.canonical_id.as_str());
    }
    let tasks = per_task
        .into_iter()
        .map(|(t, parts)| {
            let score = match averaging {
                Averaging::Micro => Prf::pool(&parts),
                Averaging::Macro => {
                    // papers with nothing extracted and nothing annotated carry no signal
                    let scored: Vec<&Prf> = parts.iter().filter(|p| !(p.empty_extraction && p.empty_gold)).collect();
                    Prf::mean(Prf::pool(&parts), &scored)
                }
            };
            (t, score)
        })
        .collect();
    Ok(EvalReport {
        averaging,
        papers: papers.len(),
        tasks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn overlap_two_of_three() {
        let p = compute_prf(&set(&["a", "b", "c"]), &set(&["b", "c", "d"]));
        assert_eq!(p.tp, 2);
        assert!((p.precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identity_and_empty_conventions() {
        let s = set(&["x", "y"]);
        let p = compute_prf(&s, &s);
        assert_eq!((p.precision, p.recall, p.f1), (1.0, 1.0, 1.0));
        let p = compute_prf(&BTreeSet::new(), &s);
        assert_eq!((p.precision, p.recall, p.f1), (0.0, 0.0, 0.0));
        assert!(p.empty_extraction && !p.empty_gold);
    }

    #[test]
    fn macro_mean_skips_papers_with_nothing_to_score() {
        let parts = [compute_prf(&set(&["a"]), &set(&["a", "b"])), compute_prf(&set(&[]), &set(&[]))];
        let scored: Vec<&Prf> = parts.iter().filter(|p| !(p.empty_extraction && p.empty_gold)).collect();
        let m = Prf::mean(Prf::pool(&parts), &scored);
        assert_eq!((m.precision, m.recall), (1.0, 0.5));
        assert_eq!((m.tp, m.extracted, m.gold), (1, 1, 2));
    }

    #[test]
    fn f1_from_precision_recall_pair() {
        assert!((f1_score(0.92, 0.88) - 0.899_555_6).abs() < 1e-6);
    }

    #[test]
    fn gold_parsing_rejects_bad_shapes() {
        let p = Path::new("gold.jsonl");
        let ok = r#"{"canonical_id":"local:a","task":"results","items":["perplexity|18.3|WikiText-103"]}"#;
        assert_eq!(parse_gold(ok, p).unwrap().len(), 1);
        let dup = r#"{"canonical_id":"local:a","task":"citations","items":["x","x"]}"#;
        assert!(matches!(parse_gold(dup, p), Err(EvalError::Gold { line: 1, .. })));
        let shape = r#"{"canonical_id":"local:a","task":"hyperparams","items":["no-equals"]}"#;
        assert!(parse_gold(shape, p).is_err());
    }

    #[test]
    fn missing_ids_listed() {
        let gold = vec![GoldAnnotation::new("local:zz", Task::Relevance, [])];
        match evaluate_corpus(&gold, &KnowledgeBase::new(), Averaging::Micro) {
            Err(EvalError::MissingIds(ids)) => assert_eq!(ids, vec!["local:zz"]),
            other => panic!("{other:?}"),
        }
    }
}
