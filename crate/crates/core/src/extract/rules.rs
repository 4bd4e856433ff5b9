//! Declarative hyperparameter rules.
//!
//! One rule per line:
//!
//! ```text
//! <name> [kind=number|text|list] [unit=auto|none|percent|magnitude] [window=sentence|<chars>] :: <regex>
//! ```
//!
//! `#` starts a comment line. The regex may use these placeholders:
//!
//! * `{VALUE}`: a number with optional `%` and magnitude suffix (`K`, `M`,
//!   `B`, `million`, ...), captured as `value`.
//! * `{WVALUE}`: like `{VALUE}` but also accepts number words ("three").
//! * `{LIST}`: a comma/"and" separated list of numbers, captured as
//!   `values` (requires `kind=list`).
//!
//! Text rules capture their value with an explicit `(?P<value>...)` group.

use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use crate::text::{NUMBER_PATTERN, Span, parse_number, sentence_spans};

use super::types::{HyperValue, HyperparamFact, HyperparamName};

pub const DEFAULT_RULES: &str = include_str!("../../data/rules/hyperparams.rules");

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("rule file line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("rule file line {line}: invalid regex: {source}")]
    Regex {
        line: usize,
        #[source]
        source: Box<regex::Error>,
    },
    #[error("cannot read rule file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Number,
    Text,
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitHandling {
    /// `%` divides by 100, magnitude suffixes multiply.
    Auto,
    /// Raw number, suffixes ignored.
    None,
    /// Always a percentage.
    Percent,
    /// Only magnitude suffixes apply.
    Magnitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Sentence,
    Chars(usize),
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub name: HyperparamName,
    pub kind: ValueKind,
    pub unit: UnitHandling,
    pub window: Window,
    pub regex: Regex,
    pub line: usize,
}

const MAGNITUDE: &str = r"(?:\s*(?P<mag>[KMB]\b|[Mm]illion\b|[Tt]housand\b|[Bb]illion\b))?";
const PERCENT: &str = r"(?:\s*(?P<pct>\\?%|percent\b))?";
const NUMBER_WORDS: &str = "one|two|three|four|five|six|seven|eight|nine|ten|eleven|twelve|sixteen|twenty|thirty|forty|fifty";

fn expand(pattern: &str) -> String {
    let value = format!(r"\$?(?P<value>{NUMBER_PATTERN})\$?{PERCENT}{MAGNITUDE}");
    let wvalue = format!(
        r"\$?(?P<value>{NUMBER_PATTERN}|(?i:{NUMBER_WORDS}))\$?{PERCENT}{MAGNITUDE}"
    );
    let list = format!(
        r"(?P<values>{n}(?:\s*,\s*(?:and\s+)?{n})*(?:\s*,?\s*and\s+{n})?)",
        n = NUMBER_PATTERN
    );
    pattern
        .replace("{VALUE}", &value)
        .replace("{WVALUE}", &wvalue)
        .replace("{LIST}", &list)
}

fn parse_rule_line(line: &str, lineno: usize) -> Result<Option<Rule>, RuleError> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let syntax = |message: &str| RuleError::Syntax {
        line: lineno,
        message: message.to_string(),
    };
    let (head, pattern) = trimmed
        .split_once("::")
        .ok_or_else(|| syntax("missing `::` between rule header and pattern"))?;
    let pattern = pattern.trim();
    if pattern.is_empty() {
        return Err(syntax("empty pattern"));
    }
    let mut parts = head.split_whitespace();
    let name = parts.next().ok_or_else(|| syntax("missing rule name"))?;
    let mut kind = ValueKind::Number;
    let mut unit = UnitHandling::Auto;
    let mut window = Window::Sentence;
    for opt in parts {
        let (k, v) = opt
            .split_once('=')
            .ok_or_else(|| syntax(&format!("option `{opt}` is not key=value")))?;
        match (k, v) {
            ("kind", "number") => kind = ValueKind::Number,
            ("kind", "text") => kind = ValueKind::Text,
            ("kind", "list") => kind = ValueKind::List,
            ("unit", "auto") => unit = UnitHandling::Auto,
            ("unit", "none") => unit = UnitHandling::None,
            ("unit", "percent") => unit = UnitHandling::Percent,
            ("unit", "magnitude") => unit = UnitHandling::Magnitude,
            ("window", "sentence") => window = Window::Sentence,
            ("window", n) => {
                let n: usize = n
                    .parse()
                    .map_err(|_| syntax(&format!("bad window `{n}`")))?;
                window = Window::Chars(n);
            }
            _ => return Err(syntax(&format!("unknown option `{opt}`"))),
        }
    }
    let regex = Regex::new(&expand(pattern)).map_err(|e| RuleError::Regex {
        line: lineno,
        source: Box::new(e),
    })?;
    let group = if kind == ValueKind::List { "values" } else { "value" };
    if !regex.capture_names().flatten().any(|n| n == group) {
        return Err(syntax(&format!("pattern has no `{group}` capture")));
    }
    Ok(Some(Rule {
        name: HyperparamName::from(name.to_string()),
        kind,
        unit,
        window,
        regex,
        line: lineno,
    }))
}

#[derive(Debug, Clone)]
pub struct RuleSet {
    rules: Vec<Rule>,
}

static SHIPPED: LazyLock<RuleSet> =
    LazyLock::new(|| RuleSet::parse(DEFAULT_RULES).expect("shipped rule file parses"));

impl Default for RuleSet {
    fn default() -> Self {
        SHIPPED.clone()
    }
}

impl RuleSet {
    pub fn parse(source: &str) -> Result<Self, RuleError> {
        let mut rules = Vec::new();
        for (i, line) in source.lines().enumerate() {
            if let Some(rule) = parse_rule_line(line, i + 1)? {
                rules.push(rule);
            }
        }
        Ok(Self { rules })
    }

    pub fn load(path: &Path) -> Result<Self, RuleError> {
        let text = std::fs::read_to_string(path).map_err(|e| RuleError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Applies every rule inside each sentence of `text`.
    pub fn apply(&self, text: &str) -> Vec<HyperparamFact> {
        let mut facts = Vec::new();
        for sentence in sentence_spans(text) {
            let s = sentence.slice(text);
            for rule in &self.rules {
                for caps in rule.regex.captures_iter(s) {
                    let whole = caps.get(0).expect("group 0");
                    if let Window::Chars(n) = rule.window
                        && whole.as_str().len() > n
                    {
                        continue;
                    }
                    facts.extend(facts_from_captures(rule, &caps, sentence.start, text));
                }
            }
        }
        facts
    }
}

fn magnitude_of(m: &str) -> (f64, &'static str) {
    match m.to_lowercase().as_str() {
        "k" | "thousand" => (1e3, "K"),
        "m" | "million" => (1e6, "M"),
        "b" | "billion" => (1e9, "B"),
        _ => (1.0, ""),
    }
}

fn facts_from_captures(
    rule: &Rule,
    caps: &regex::Captures<'_>,
    offset: usize,
    text: &str,
) -> Vec<HyperparamFact> {
    match rule.kind {
        ValueKind::Text => {
            let Some(v) = caps.name("value") else { return vec![] };
            let span = Span::new(offset + v.start(), offset + v.end());
            vec![HyperparamFact {
                name: rule.name.clone(),
                value: HyperValue::Text(v.as_str().to_string()),
                unit: None,
                span,
                surface: span.slice(text).to_string(),
            }]
        }
        ValueKind::List => {
            let Some(list) = caps.name("values") else { return vec![] };
            static NUM: LazyLock<Regex> = LazyLock::new(|| Regex::new(NUMBER_PATTERN).unwrap());
            NUM.find_iter(list.as_str())
                .filter_map(|m| {
                    let value = parse_number(m.as_str())?;
                    let span = Span::new(offset + list.start() + m.start(), offset + list.start() + m.end());
                    Some(HyperparamFact {
                        name: rule.name.clone(),
                        value: HyperValue::Number(value),
                        unit: None,
                        span,
                        surface: span.slice(text).to_string(),
                    })
                })
                .collect()
        }
        ValueKind::Number => {
            let Some(v) = caps.name("value") else { return vec![] };
            let Some(mut value) = parse_number(v.as_str()) else { return vec![] };
            let mut end = v.end();
            let mut unit = None;
            let pct = caps.name("pct");
            let mag = caps.name("mag");
            let use_pct = match rule.unit {
                UnitHandling::Auto => pct.is_some(),
                UnitHandling::Percent => true,
                _ => false,
            };
            let use_mag = matches!(rule.unit, UnitHandling::Auto | UnitHandling::Magnitude);
            if use_pct {
                value /= 100.0;
                unit = Some("%".to_string());
                if let Some(p) = pct {
                    end = p.end();
                }
            } else if use_mag && let Some(m) = mag {
                let (factor, label) = magnitude_of(m.as_str());
                value *= factor;
                unit = Some(label.to_string());
                end = m.end();
            }
            let span = Span::new(offset + v.start(), offset + end);
            vec![HyperparamFact {
                name: rule.name.clone(),
                value: HyperValue::Number(value),
                unit,
                span,
                surface: span.slice(text).to_string(),
            }]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_rules_parse() {
        assert!(RuleSet::default().len() > 10);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = RuleSet::parse("# ok\nlearning_rate kind=weird :: {VALUE}").unwrap_err();
        assert!(matches!(err, RuleError::Syntax { line: 2, .. }));
        let err = RuleSet::parse("lr :: (unclosed").unwrap_err();
        assert!(matches!(err, RuleError::Regex { line: 1, .. }));
        let err = RuleSet::parse("lr :: learning rate").unwrap_err();
        assert!(matches!(err, RuleError::Syntax { .. }));
    }

    #[test]
    fn custom_rule_extends_without_rebuild() {
        let rules = RuleSet::parse(r"warmup_steps window=60 :: (?i)warm-?up\s+(?:of\s+)?{VALUE}\s+steps").unwrap();
        let facts = rules.apply("We use a warmup of 4K steps.");
        assert_eq!(facts.len(), 1);
        assert_eq!(facts[0].name, HyperparamName::Other("warmup_steps".into()));
        assert_eq!(facts[0].value, HyperValue::Number(4000.0));
        assert_eq!(facts[0].unit.as_deref(), Some("K"));
        assert_eq!(facts[0].surface, "4K");
    }

    #[test]
    fn window_limits_match_length() {
        let rules = RuleSet::parse(r"x window=10 :: alpha.*?{VALUE}").unwrap();
        assert!(rules.apply("alpha 1.").len() == 1);
        assert!(rules.apply("alpha is a long way from 1.").is_empty());
    }
}
