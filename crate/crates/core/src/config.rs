//! Run configuration and the four ablation switches.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("year range {min}:{max} is empty (min must not exceed max)")]
    YearRange { min: i32, max: i32 },
    #[error("worker count must be at least 1")]
    ZeroWorkers,
    #[error("unknown stage toggle `{0}` (expected one of parallel_parsing, relevance_classifier, rule_patterns, llm_summarisation)")]
    UnknownStage(String),
    #[error("stage toggles must cover every component; missing `{0}`")]
    MissingStage(String),
    #[error("topic query must not be empty")]
    EmptyTopic,
    #[error("output path {path} is not writable: {reason}")]
    Unwritable { path: PathBuf, reason: String },
}

/// Components that can be switched off for an ablation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    ParallelParsing,
    RelevanceClassifier,
    RulePatterns,
    LlmSummarisation,
}

impl Component {
    pub const ALL: [Component; 4] = [
        Component::ParallelParsing,
        Component::RelevanceClassifier,
        Component::RulePatterns,
        Component::LlmSummarisation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Component::ParallelParsing => "parallel_parsing",
            Component::RelevanceClassifier => "relevance_classifier",
            Component::RulePatterns => "rule_patterns",
            Component::LlmSummarisation => "llm_summarisation",
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Component {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Component::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| ConfigError::UnknownStage(s.to_string()))
    }
}

/// Enabled flag for each [`Component`]; always covers all four.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageToggles(BTreeMap<Component, bool>);

impl Default for StageToggles {
    fn default() -> Self {
        Self(Component::ALL.into_iter().map(|c| (c, true)).collect())
    }
}

impl StageToggles {
    /// Builds toggles from string keys, rejecting unknown names and
    /// requiring every component to be present.
    pub fn from_pairs<'a>(
        pairs: impl IntoIterator<Item = (&'a str, bool)>,
    ) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            map.insert(k.parse::<Component>()?, v);
        }
        for c in Component::ALL {
            if !map.contains_key(&c) {
                return Err(ConfigError::MissingStage(c.as_str().to_string()));
            }
        }
        Ok(Self(map))
    }

    pub fn all_on() -> Self {
        Self::default()
    }

    pub fn without(component: Component) -> Self {
        let mut t = Self::default();
        t.set(component, false);
        t
    }

    pub fn set(&mut self, component: Component, enabled: bool) {
        self.0.insert(component, enabled);
    }

    pub fn enabled(&self, component: Component) -> bool {
        self.0.get(&component).copied().unwrap_or(true)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Component, bool)> + '_ {
        self.0.iter().map(|(c, v)| (*c, *v))
    }
}

/// Source of candidate papers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Arxiv,
    SemanticScholar,
    LocalFile,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Arxiv => "arxiv",
            SourceKind::SemanticScholar => "semantic_scholar",
            SourceKind::LocalFile => "local_file",
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub topic_query: String,
    pub year_min: i32,
    pub year_max: i32,
    pub worker_count: usize,
    pub random_seed: u64,
    pub stage_toggles: StageToggles,
    pub corpus_cache: PathBuf,
    pub kb_path: PathBuf,
    pub report_path: PathBuf,
    pub artifacts_dir: PathBuf,
    /// Generation backend URL; extractive summaries only when absent.
    pub summariser_endpoint: Option<String>,
    pub sources: Vec<SourceKind>,
    /// Keyword list file, one phrase per line. Topic terms when absent.
    pub keywords_path: Option<PathBuf>,
    /// Rule file for hyperparameter patterns. Shipped rules when absent.
    pub rules_path: Option<PathBuf>,
    /// Directory of script templates. Shipped templates when absent.
    pub templates_dir: Option<PathBuf>,
    /// Persisted relevance model; otherwise trained from the corpus cache
    /// when it holds a labelled set.
    pub relevance_model: Option<PathBuf>,
    /// Replace conflicting KB entries instead of failing.
    pub overwrite: bool,
}

impl RunConfig {
    pub fn new(topic_query: impl Into<String>) -> Self {
        Self {
            topic_query: topic_query.into(),
            year_min: 1900,
            year_max: 2100,
            worker_count: 1,
            random_seed: DEFAULT_SEED,
            stage_toggles: StageToggles::default(),
            corpus_cache: PathBuf::from("corpus"),
            kb_path: PathBuf::from("kb.jsonl"),
            report_path: PathBuf::from("report.md"),
            artifacts_dir: PathBuf::from("artifacts"),
            summariser_endpoint: None,
            sources: vec![SourceKind::Arxiv, SourceKind::SemanticScholar],
            keywords_path: None,
            rules_path: None,
            templates_dir: None,
            relevance_model: None,
            overwrite: false,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.topic_query.trim().is_empty() {
            return Err(ConfigError::EmptyTopic);
        }
        if self.year_min > self.year_max {
            return Err(ConfigError::YearRange {
                min: self.year_min,
                max: self.year_max,
            });
        }
        if self.worker_count == 0 {
            return Err(ConfigError::ZeroWorkers);
        }
        Ok(())
    }

    /// Worker count actually used by the parse stage.
    pub fn effective_workers(&self) -> usize {
        if self.stage_toggles.enabled(Component::ParallelParsing) {
            self.worker_count
        } else {
            1
        }
    }

    pub fn year_range(&self) -> (i32, i32) {
        (self.year_min, self.year_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toggles_reject_unknown_keys() {
        let err = StageToggles::from_pairs([
            ("parallel_parsing", true),
            ("relevance_classifier", true),
            ("rule_patterns", true),
            ("llm_summarisation", true),
            ("ocr", false),
        ])
        .unwrap_err();
        assert_eq!(err, ConfigError::UnknownStage("ocr".into()));
    }

    #[test]
    fn toggles_require_full_cover() {
        let err = StageToggles::from_pairs([("parallel_parsing", true)]).unwrap_err();
        assert!(matches!(err, ConfigError::MissingStage(_)));
    }

    #[test]
    fn validate_year_order_and_workers() {
        let mut c = RunConfig::new("ar models");
        c.year_min = 2024;
        c.year_max = 2016;
        assert!(matches!(c.validate(), Err(ConfigError::YearRange { .. })));
        c.year_min = 2016;
        c.year_max = 2024;
        c.worker_count = 0;
        assert_eq!(c.validate(), Err(ConfigError::ZeroWorkers));
    }

    #[test]
    fn parallel_toggle_forces_single_worker() {
        let mut c = RunConfig::new("q");
        c.worker_count = 8;
        assert_eq!(c.effective_workers(), 8);
        c.stage_toggles = StageToggles::without(Component::ParallelParsing);
        assert_eq!(c.effective_workers(), 1);
    }
}
