//! Result extraction: numbers near metric names, with dataset and split.

use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;

use crate::text::{Span, parse_number, sentence_spans};

use super::rules::RuleError;
use super::types::{Metric, ResultFact, Split};

pub const DEFAULT_GAZETTEER: &str = include_str!("../../data/datasets.txt");

/// Dataset names and their spelling variants.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    entries: Vec<(String, Regex)>,
}

static SHIPPED: LazyLock<Gazetteer> =
    LazyLock::new(|| Gazetteer::parse(DEFAULT_GAZETTEER).expect("shipped gazetteer parses"));

impl Default for Gazetteer {
    fn default() -> Self {
        SHIPPED.clone()
    }
}

impl Gazetteer {
    pub fn parse(source: &str) -> Result<Self, RuleError> {
        let mut entries = Vec::new();
        for (i, line) in source.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, pattern) = line.split_once(" | ").ok_or_else(|| RuleError::Syntax {
                line: i + 1,
                message: "expected `name | pattern`".into(),
            })?;
            let re = Regex::new(&format!("(?i){}", pattern.trim())).map_err(|e| RuleError::Regex {
                line: i + 1,
                source: Box::new(e),
            })?;
            entries.push((name.trim().to_string(), re));
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, RuleError> {
        let text = std::fs::read_to_string(path).map_err(|e| RuleError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text)
    }

    /// Adds a dataset; `pattern` is a case-insensitive regex.
    pub fn add(&mut self, name: &str, pattern: &str) -> Result<(), regex::Error> {
        self.entries
            .push((name.to_string(), Regex::new(&format!("(?i){pattern}"))?));
        Ok(())
    }

    /// Non-overlapping dataset mentions in `text`, earliest (then longest)
    /// first.
    pub fn find_all(&self, text: &str) -> Vec<(Span, String)> {
        let mut hits: Vec<(Span, String)> = self
            .entries
            .iter()
            .flat_map(|(name, re)| {
                re.find_iter(text)
                    .map(move |m| (Span::new(m.start(), m.end()), name.clone()))
            })
            .collect();
        hits.sort_by(|a, b| a.0.start.cmp(&b.0.start).then(b.0.len().cmp(&a.0.len())));
        let mut out: Vec<(Span, String)> = Vec::new();
        for h in hits {
            if out.last().is_none_or(|l| !l.0.overlaps(&h.0)) {
                out.push(h);
            }
        }
        out
    }
}

static METRIC_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(perplexit(?:y|ies)|ppl|accuracy|f1(?:[- ]score)?|f[- ]score|bleu(?:[- ]score)?)\b")
        .unwrap()
});
static RESULT_NUM_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\d+(?:\.\d+)?").unwrap());
static MARKER_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\[[^\]]{0,60}\]|\([^()]{0,80}\b(?:19|20)\d{2}[a-z]?\)").unwrap()
});
static SPLIT_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(test|testing|validation|valid|dev|development|training|train)\b").unwrap()
});
static UNIT_AFTER_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^\s*(?:[KMB]\b|x\b|×|layers?\b|epochs?\b|steps?\b|iterations?\b|param(?:eter)?s?\b|heads?\b|tokens?\b|hours?\b|days?\b|minutes?\b|GPUs?\b|million\b|billion\b|thousand\b|words?\b|sentences?\b|papers?\b|samples?\b|examples?\b|dimensions?\b|units?\b|-layer|-dimensional|times\b)")
        .unwrap()
});
static REF_BEFORE_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)(?:table|section|sec\.|figure|fig\.|eq\.|equation|appendix|row|line|version|v)\s*$")
        .unwrap()
});

fn metric_of(word: &str) -> Metric {
    let w = word.to_lowercase();
    if w.starts_with("perplexit") || w == "ppl" {
        Metric::Perplexity
    } else if w.starts_with("accuracy") {
        Metric::Accuracy
    } else if w.starts_with("bleu") {
        Metric::Bleu
    } else {
        Metric::F1
    }
}

fn split_of(word: &str) -> Split {
    match word.to_lowercase().as_str() {
        "test" | "testing" => Split::Test,
        "training" | "train" => Split::Train,
        _ => Split::Valid,
    }
}

/// Scans each sentence for metric names and captures the numbers that
/// follow them, up to the next metric mention. A number directly before a
/// metric word ("66.5 perplexity") also counts.
pub fn extract_results_with(text: &str, gazetteer: &Gazetteer) -> Vec<ResultFact> {
    let mut facts = Vec::new();
    for sentence in sentence_spans(text) {
        let s = sentence.slice(text);
        let metrics: Vec<(Span, Metric)> = METRIC_RE
            .find_iter(s)
            .map(|m| (Span::new(m.start(), m.end()), metric_of(m.as_str())))
            .collect();
        if metrics.is_empty() {
            continue;
        }
        let datasets = gazetteer.find_all(s);
        let markers: Vec<Span> = MARKER_RE
            .find_iter(s)
            .map(|m| Span::new(m.start(), m.end()))
            .collect();
        let splits: Vec<(Span, Split)> = SPLIT_RE
            .find_iter(s)
            .map(|m| (Span::new(m.start(), m.end()), split_of(m.as_str())))
            .collect();

        let mut captured: Vec<(Span, Metric, f64)> = Vec::new();
        for m in RESULT_NUM_RE.find_iter(s) {
            let span = Span::new(m.start(), m.end());
            if datasets.iter().any(|(d, _)| d.overlaps(&span))
                || markers.iter().any(|k| k.overlaps(&span))
                || metrics.iter().any(|(k, _)| k.overlaps(&span))
            {
                continue;
            }
            let before = &s[..span.start];
            if before
                .chars()
                .next_back()
                .is_some_and(|c| c.is_alphanumeric() || c == '-' || c == '.' || c == '_')
            {
                // identifiers like GPT-3 or version strings
                continue;
            }
            if REF_BEFORE_RE.is_match(before) {
                continue;
            }
            let after = &s[span.end..];
            let Some(value) = parse_number(m.as_str()) else { continue };
            let is_year = !m.as_str().contains('.') && (1900.0..=2099.0).contains(&value);
            if is_year {
                continue;
            }

            let preceding = metrics.iter().rev().find(|(k, _)| k.end <= span.start);
            let metric = match preceding {
                Some((_, metric)) => {
                    if UNIT_AFTER_RE.is_match(after) {
                        continue;
                    }
                    if after.trim_start().starts_with('%')
                        && !matches!(metric, Metric::Accuracy | Metric::F1 | Metric::Other(_))
                    {
                        continue;
                    }
                    metric.clone()
                }
                None => {
                    // only "<number> <metric>" with at most one word between
                    let following = metrics.iter().find(|(k, _)| k.start >= span.end);
                    match following {
                        Some((k, metric))
                            if s[span.end..k.start].split_whitespace().count() <= 1
                                && !s[span.end..k.start].contains(',') =>
                        {
                            metric.clone()
                        }
                        _ => continue,
                    }
                }
            };
            if metric == Metric::Perplexity && value <= 0.0 {
                continue;
            }
            captured.push((span, metric, value));
        }

        for (i, (span, metric, value)) in captured.iter().enumerate() {
            let next_start = captured.get(i + 1).map(|c| c.0.start).unwrap_or(s.len());
            let dataset = datasets
                .iter()
                .find(|(d, _)| d.start >= span.end && d.start < next_start)
                .or_else(|| datasets.iter().rev().find(|(d, _)| d.end <= span.start))
                .or_else(|| datasets.first())
                .map(|(_, name)| name.clone());
            let split = splits
                .iter()
                .min_by_key(|(sp, _)| {
                    if sp.end <= span.start {
                        span.start - sp.end
                    } else {
                        sp.start.saturating_sub(span.end)
                    }
                })
                .map(|(_, sp)| *sp);
            let abs = span.shift(sentence.start);
            facts.push(ResultFact {
                metric: metric.clone(),
                value: *value,
                dataset,
                split,
                span: abs,
                surface: abs.slice(text).to_string(),
            });
        }
    }
    facts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn extract(text: &str) -> Vec<ResultFact> {
        extract_results_with(text, &Gazetteer::default())
    }

    #[test]
    fn gazetteer_prefers_longest_non_overlapping() {
        let g = Gazetteer::default();
        let hits = g.find_all("WikiText--103 and WikiText-2 and the Penn Treebank");
        let names: Vec<_> = hits.iter().map(|h| h.1.as_str()).collect();
        assert_eq!(names, vec!["WikiText-103", "WikiText-2", "Penn Treebank"]);
    }

    #[test]
    fn two_datasets_in_one_sentence() {
        let f = extract("They report perplexity 18.3 on WikiText--103 and 54.5 on the Penn Treebank.");
        assert_eq!(f.len(), 2);
        assert_eq!((f[0].value, f[0].dataset.as_deref()), (18.3, Some("WikiText-103")));
        assert_eq!((f[1].value, f[1].dataset.as_deref()), (54.5, Some("Penn Treebank")));
    }

    #[test]
    fn ignores_counts_years_and_markers() {
        let f = extract("After 500 epochs in 2019 [12] the test perplexity was 66.5 on WikiText-2 with 24M parameters.");
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].value, 66.5);
        assert_eq!(f[0].split, Some(Split::Test));
    }

    #[test]
    fn number_before_metric() {
        let f = extract("Our model reaches 92.1 accuracy on the benchmark.");
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].metric, Metric::Accuracy);
    }

    #[test]
    fn no_number_no_fact() {
        assert!(extract("Perplexity is the standard metric for language models.").is_empty());
    }
}
