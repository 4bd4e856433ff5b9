//! Rule-based fact extraction: metadata, hyperparameters, results and
//! citations.

mod citations;
mod metadata;
mod results;
mod rules;
mod types;

use std::sync::LazyLock;

use regex::Regex;

pub use citations::{
    ReferenceIndex, extract_citations, extract_citations_with_refs, find_reference_section,
    parse_reference_list, reference_key,
};
pub use metadata::{extract_metadata, find_abstract, merge_metadata};
pub use results::{DEFAULT_GAZETTEER, Gazetteer, extract_results_with};
pub use rules::{DEFAULT_RULES, Rule, RuleError, RuleSet, UnitHandling, ValueKind, Window};
pub use types::{
    CitationLink, FactBundle, HyperValue, HyperparamFact, HyperparamName, Metadata, Metric,
    ReferenceEntry, ResultFact, Split,
};

use crate::text::{NUMBER_PATTERN, Span, parse_number, sentence_spans};

/// Hyperparameters via the shipped rule file.
pub fn extract_hyperparams(text: &str) -> Vec<HyperparamFact> {
    dedup_hyperparams(RuleSet::default().apply(text))
}

/// Results via the shipped gazetteer.
pub fn extract_results(text: &str) -> Vec<ResultFact> {
    dedup_results(extract_results_with(text, &Gazetteer::default()))
}

/// Facts with the same name and value whose spans overlap collapse to the
/// longest one, and a generic name yields to a specialised one on the same
/// value span (`dropout` to `dropout_emb`). Output is ordered by span.
pub fn dedup_hyperparams(mut facts: Vec<HyperparamFact>) -> Vec<HyperparamFact> {
    let specialised: Vec<(String, Span)> = facts.iter().map(|f| (f.name.as_str().to_string(), f.span)).collect();
    facts.retain(|f| {
        let prefix = format!("{}_", f.name.as_str());
        !specialised.iter().any(|(n, sp)| *sp == f.span && n.starts_with(&prefix))
    });
    facts.sort_by(|a, b| {
        a.span
            .start
            .cmp(&b.span.start)
            .then(b.span.len().cmp(&a.span.len()))
            .then(a.name.cmp(&b.name))
    });
    let mut out: Vec<HyperparamFact> = Vec::with_capacity(facts.len());
    for f in facts {
        let dup = out
            .iter()
            .any(|o| o.name == f.name && o.value.key() == f.value.key() && o.span.overlaps(&f.span));
        if !dup {
            out.push(f);
        }
    }
    out
}

pub fn dedup_results(mut facts: Vec<ResultFact>) -> Vec<ResultFact> {
    facts.sort_by(|a, b| a.span.cmp(&b.span).then(a.metric.cmp(&b.metric)));
    let mut out: Vec<ResultFact> = Vec::with_capacity(facts.len());
    for f in facts {
        if !out
            .iter()
            .any(|o| o.metric == f.metric && o.value == f.value && o.span.overlaps(&f.span))
        {
            out.push(f);
        }
    }
    out
}

static SETUP_HEADING: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?im)^[ \t]*(?:\d+(?:\.\d+)*\.?[ \t]+)?(?:experimental[ \t]+(?:setup|settings?|details)|experiments|training[ \t]+(?:details|setup|procedure)|implementation[ \t]+details|setup|hyper-?parameters)[ \t]*$")
        .unwrap()
});
static NEXT_SECTION: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?im)^[ \t]*(?:\d+(?:\.\d+)*\.?[ \t]+\p{Lu}[^\n.]{0,80}|(?:results|discussion|conclusions?|related[ \t]+work|references|analysis|evaluation|limitations|acknowledge?ments|appendix)[ \t]*)$")
        .unwrap()
});

/// Span of the experimental-setup section: from a setup-like heading to the
/// next section heading (or the end of the body).
pub fn setup_region(text: &str) -> Option<Span> {
    let heading = SETUP_HEADING.find(text)?;
    let body_end = find_reference_section(text).unwrap_or(text.len());
    if heading.start() >= body_end {
        return None;
    }
    let start = heading.end();
    let end = NEXT_SECTION
        .find_iter(&text[start..body_end])
        .map(|m| start + m.start())
        .find(|&pos| pos > start)
        .unwrap_or(body_end);
    Some(Span::new(start, end))
}

/// Adjacency-only matcher used when rule patterns are disabled: a known
/// parameter phrase immediately followed by a plain number.
pub fn baseline_hyperparams(text: &str) -> Vec<HyperparamFact> {
    static PHRASE: LazyLock<Regex> = LazyLock::new(|| {
        Regex::new(&format!(
            r"(?i)\b(?P<name>learning rate|dropout|batch size|epochs|layers|hidden size|embedding size|vocabulary size|steps|heads|gradient clipping)\s+(?P<value>{NUMBER_PATTERN})"
        ))
        .unwrap()
    });
    let mut facts = Vec::new();
    for sentence in sentence_spans(text) {
        let s = sentence.slice(text);
        for c in PHRASE.captures_iter(s) {
            let v = c.name("value").unwrap();
            let Some(value) = parse_number(v.as_str()) else { continue };
            let name = match c["name"].to_lowercase().as_str() {
                "learning rate" => HyperparamName::LearningRate,
                "dropout" => HyperparamName::Dropout,
                "batch size" => HyperparamName::BatchSize,
                "epochs" => HyperparamName::Epochs,
                "layers" => HyperparamName::NumLayers,
                "hidden size" => HyperparamName::HiddenSize,
                "embedding size" => HyperparamName::EmbedSize,
                "vocabulary size" => HyperparamName::VocabSize,
                "steps" => HyperparamName::Steps,
                "heads" => HyperparamName::Other("num_heads".into()),
                _ => HyperparamName::GradClip,
            };
            let span = Span::new(sentence.start + v.start(), sentence.start + v.end());
            facts.push(HyperparamFact {
                name,
                value: HyperValue::Number(value),
                unit: None,
                span,
                surface: span.slice(text).to_string(),
            });
        }
    }
    dedup_hyperparams(facts)
}

/// Configured extractor. `use_rules = false` swaps the rule file for the
/// adjacency baseline (the rule-pattern ablation).
#[derive(Debug, Clone)]
pub struct Extractor {
    pub rules: RuleSet,
    pub gazetteer: Gazetteer,
    pub use_rules: bool,
}

impl Default for Extractor {
    fn default() -> Self {
        Self {
            rules: RuleSet::default(),
            gazetteer: Gazetteer::default(),
            use_rules: true,
        }
    }
}

impl Extractor {
    pub fn new(rules: RuleSet, gazetteer: Gazetteer) -> Self {
        Self {
            rules,
            gazetteer,
            use_rules: true,
        }
    }

    pub fn without_rules(mut self) -> Self {
        self.use_rules = false;
        self
    }

    pub fn hyperparams(&self, text: &str) -> Vec<HyperparamFact> {
        if self.use_rules {
            dedup_hyperparams(self.rules.apply(text))
        } else {
            baseline_hyperparams(text)
        }
    }

    pub fn results(&self, text: &str) -> Vec<ResultFact> {
        dedup_results(extract_results_with(text, &self.gazetteer))
    }

    /// Full bundle for one document. Text after the reference heading is
    /// excluded from hyperparameter and result extraction.
    pub fn extract(&self, text: &str, api_metadata: Option<&Metadata>) -> FactBundle {
        let (parsed, mut warnings) = extract_metadata(text);
        if let Some(api) = api_metadata {
            warnings.retain(|w| {
                !(w.ends_with("title found") && !api.title.is_empty()
                    || w.ends_with("authors found") && !api.authors.is_empty()
                    || w.ends_with("year found") && api.year.is_some()
                    || w.ends_with("abstract found") && api.abstract_text.is_some())
            });
        }
        let metadata = merge_metadata(parsed, api_metadata);
        let body_end = find_reference_section(text).unwrap_or(text.len());
        let body = &text[..body_end];
        let (citations, references) = extract_citations_with_refs(text);
        FactBundle {
            metadata,
            hyperparams: self.hyperparams(body),
            results: self.results(body),
            citations,
            references,
            setup_region: setup_region(text),
            warnings,
        }
    }
}
