//! Shared text utilities: sentence segmentation, tokenization, normalization
//! of extracted document text, and number parsing.

use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Half-open byte range into a document's parsed text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn shift(self, by: usize) -> Span {
        Span::new(self.start + by, self.end + by)
    }

    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start..self.end]
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

const ABBREVIATIONS: &[&str] = &[
    "al", "e.g", "i.e", "etc", "fig", "figs", "eq", "eqs", "sec", "secs", "tab", "vs", "cf",
    "approx", "no", "ref", "refs", "dr", "mr", "ms", "prof", "st", "inc", "jr", "resp", "vol",
    "pp", "ed", "eds", "ch", "app",
];

fn is_abbreviation(word: &str) -> bool {
    let w = word.trim_start_matches(|c: char| !c.is_alphanumeric());
    if w.chars().count() == 1 && w.chars().all(|c| c.is_uppercase()) {
        // initials such as "A. Smith"
        return true;
    }
    let lower = w.to_lowercase();
    ABBREVIATIONS.contains(&lower.as_str())
}

fn is_heading_line(line: &str) -> bool {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.len() > 100 {
        return false;
    }
    !trimmed.ends_with(['.', '?', '!', ',', ';', ':'])
        && trimmed.split_whitespace().count() <= 14
}

/// Splits text into sentence spans.
///
/// A boundary is a `.`, `?` or `!` followed by whitespace and an uppercase
/// letter (the word before a period is checked against an abbreviation
/// list), a blank line, or the end of a short heading-like line.
pub fn sentence_spans(text: &str) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut start = 0usize;
    let push = |s: usize, e: usize, spans: &mut Vec<Span>| {
        let slice = &text[s..e];
        let lead = slice.len() - slice.trim_start().len();
        let trail = slice.len() - slice.trim_end().len();
        if lead + trail < slice.len() {
            spans.push(Span::new(s + lead, e - trail));
        }
    };

    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut idx = 0;
    while idx < chars.len() {
        let (pos, c) = chars[idx];
        match c {
            '.' | '?' | '!' => {
                // find next non-whitespace char
                let mut j = idx + 1;
                let mut saw_ws = false;
                while j < chars.len() && chars[j].1.is_whitespace() {
                    saw_ws = true;
                    j += 1;
                }
                let next_upper = j < chars.len()
                    && (chars[j].1.is_uppercase() || chars[j].1 == '[' || chars[j].1 == '(');
                let at_end = j >= chars.len();
                if saw_ws && (next_upper || at_end) {
                    let guarded = c == '.' && {
                        let before = &text[start..pos];
                        let word = before
                            .rsplit(|ch: char| ch.is_whitespace() || ch == '(')
                            .next()
                            .unwrap_or("");
                        is_abbreviation(word)
                    };
                    if !guarded {
                        push(start, pos + c.len_utf8(), &mut spans);
                        start = pos + c.len_utf8();
                    }
                }
            }
            '\n' => {
                let line_begin = text[..pos].rfind('\n').map(|p| p + 1).unwrap_or(0);
                let line = &text[line_begin..pos];
                let next_blank = text[pos + 1..]
                    .split('\n')
                    .next()
                    .map(|l| l.trim().is_empty())
                    .unwrap_or(true);
                let prev_closed = text[..line_begin.saturating_sub(1)]
                    .rsplit('\n')
                    .next()
                    .map(|l| {
                        let l = l.trim_end();
                        l.is_empty() || l.ends_with(['.', '?', '!', ':'])
                    })
                    .unwrap_or(true);
                let next_lower = text[pos + 1..]
                    .trim_start()
                    .chars()
                    .next()
                    .is_some_and(char::is_lowercase);
                let heading = is_heading_line(line) && prev_closed && !next_lower;
                if line.trim().is_empty() || next_blank || heading {
                    push(start, pos, &mut spans);
                    start = pos + 1;
                }
            }
            _ => {}
        }
        idx += 1;
    }
    push(start, text.len(), &mut spans);
    spans
}

static TOKEN_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[\p{L}\p{N}]+").unwrap());

pub static DEFAULT_STOPWORDS: LazyLock<HashSet<String>> = LazyLock::new(|| {
    include_str!("../data/stopwords.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
});

/// Lowercased alphanumeric tokenizer with a stop-word list.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tokenizer {
    /// `None` uses the shipped list.
    stopwords: Option<HashSet<String>>,
}

impl Tokenizer {
    pub fn with_stopwords(stopwords: impl IntoIterator<Item = String>) -> Self {
        Self {
            stopwords: Some(stopwords.into_iter().collect()),
        }
    }

    pub fn without_stopwords() -> Self {
        Self {
            stopwords: Some(HashSet::new()),
        }
    }

    pub fn tokens(&self, text: &str) -> Vec<String> {
        let stop = self.stopwords.as_ref().unwrap_or(&DEFAULT_STOPWORDS);
        TOKEN_RE
            .find_iter(text)
            .map(|m| m.as_str().to_lowercase())
            .filter(|t| !stop.contains(t))
            .collect()
    }
}

const LIGATURES: &[(char, &str)] = &[
    ('\u{FB00}', "ff"),
    ('\u{FB01}', "fi"),
    ('\u{FB02}', "fl"),
    ('\u{FB03}', "ffi"),
    ('\u{FB04}', "ffl"),
    ('\u{FB05}', "st"),
    ('\u{FB06}', "st"),
];

/// Removes control characters other than newline; tabs become spaces and
/// carriage returns are dropped.
pub fn strip_control(text: &str) -> String {
    text.chars()
        .filter_map(|c| match c {
            '\n' => Some('\n'),
            '\t' => Some(' '),
            c if c.is_control() => None,
            c => Some(c),
        })
        .collect()
}

/// Maps typographic ligatures to ASCII and joins words hyphenated across a
/// line break ("regu-\nlarization" becomes "regularization").
pub fn normalize_extracted(text: &str) -> String {
    static HYPHEN_BREAK: LazyLock<Regex> =
        LazyLock::new(|| Regex::new(r"(\p{L})-[ \t]*\n[ \t]*(\p{Ll})").unwrap());
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match LIGATURES.iter().find(|(l, _)| *l == c) {
            Some((_, rep)) => out.push_str(rep),
            None => out.push(c),
        }
    }
    HYPHEN_BREAK.replace_all(&out, "$1$2").into_owned()
}

/// Removes hyphens that join two letters, so "Auto-Regressive" and
/// "autoregressive" compare equal after lowercasing.
pub fn dehyphenate(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    for (i, &c) in chars.iter().enumerate() {
        if (c == '-' || c == '\u{2010}')
            && i > 0
            && i + 1 < chars.len()
            && chars[i - 1].is_alphabetic()
            && chars[i + 1].is_alphabetic()
        {
            continue;
        }
        out.push(c);
    }
    out
}

/// Lowercase, strip everything except letters and digits.
pub fn normalize_title(title: &str) -> String {
    title
        .chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

const WORD_NUMBERS: &[(&str, f64)] = &[
    ("one", 1.0),
    ("two", 2.0),
    ("three", 3.0),
    ("four", 4.0),
    ("five", 5.0),
    ("six", 6.0),
    ("seven", 7.0),
    ("eight", 8.0),
    ("nine", 9.0),
    ("ten", 10.0),
    ("eleven", 11.0),
    ("twelve", 12.0),
    ("sixteen", 16.0),
    ("twenty", 20.0),
    ("thirty", 30.0),
    ("forty", 40.0),
    ("fifty", 50.0),
    ("hundred", 100.0),
];

pub fn word_number(word: &str) -> Option<f64> {
    let lower = word.to_lowercase();
    WORD_NUMBERS
        .iter()
        .find(|(w, _)| *w == lower)
        .map(|(_, v)| *v)
}

/// Regex fragment matching one number in any accepted surface form.
pub const NUMBER_PATTERN: &str = r"[-+−]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?(?:[eE][-+−]?\d+)?(?:\s*(?:×|\\times|x)\s*10\s*\^?\s*\{?\s*[-−]?\s*\d+\s*\}?)?";

static POWER_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?P<mant>[^×x\\]+?)\s*(?:×|\\times|x)\s*10\s*\^?\s*\{?\s*(?P<exp>[-−]?\s*\d+)\s*\}?$")
        .unwrap()
});

/// Parses a number surface: period decimals, thousands separators,
/// `2e-4`, `2×10^-4`, `2\times 10^{-4}`, unicode minus, and small number
/// words ("three").
pub fn parse_number(surface: &str) -> Option<f64> {
    let s = surface.trim().trim_matches('$').trim();
    if let Some(v) = word_number(s) {
        return Some(v);
    }
    if let Some(caps) = POWER_RE.captures(s) {
        let mant = parse_plain(caps.name("mant")?.as_str())?;
        let exp: String = caps["exp"]
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| if c == '−' { '-' } else { c })
            .collect();
        let exp: i32 = exp.parse().ok()?;
        return Some(mant * 10f64.powi(exp));
    }
    parse_plain(s)
}

fn parse_plain(s: &str) -> Option<f64> {
    let cleaned: String = s
        .trim()
        .chars()
        .filter(|c| *c != ',')
        .map(|c| if c == '−' { '-' } else { c })
        .collect();
    let v: f64 = cleaned.parse().ok()?;
    v.is_finite().then_some(v)
}

/// Canonical decimal rendering used for value identity: rounds to ten
/// significant digits so `0.1 + 0.2` and `0.3` share a key.
pub fn canonical_number(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{v:.10e}").parse().unwrap_or(v);
    format!("{rounded}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentences(text: &str) -> Vec<&str> {
        sentence_spans(text).iter().map(|s| s.slice(text)).collect()
    }

    #[test]
    fn splits_on_period_whitespace_uppercase() {
        let s = sentences("We train a model. It works well. done.");
        assert_eq!(s, vec!["We train a model.", "It works well. done."]);
    }

    #[test]
    fn abbreviation_guard() {
        let s = sentences("As shown by Smith et al. The result holds. See Fig. 3 for details.");
        assert_eq!(
            s,
            vec!["As shown by Smith et al. The result holds.", "See Fig. 3 for details."]
        );
    }

    #[test]
    fn decimals_do_not_split() {
        let s = sentences("The learning rate 0.001 was used. Perplexity was 66.5. Next.");
        assert_eq!(s[0], "The learning rate 0.001 was used.");
        assert_eq!(s[1], "Perplexity was 66.5.");
    }

    #[test]
    fn headings_and_blank_lines_break() {
        let text = "Experimental Setup\nWe use a learning rate of 30.\n\nResults\nPerplexity fell.";
        assert_eq!(
            sentences(text),
            vec!["Experimental Setup", "We use a learning rate of 30.", "Results", "Perplexity fell."]
        );
    }

    #[test]
    fn number_forms() {
        assert_eq!(parse_number("0.001"), Some(0.001));
        assert_eq!(parse_number("2e-4"), Some(2e-4));
        assert!((parse_number("2×10^-4").unwrap() - 2e-4).abs() < 1e-18);
        assert!((parse_number("2\\times 10^{-4}").unwrap() - 2e-4).abs() < 1e-18);
        assert_eq!(parse_number("1,150"), Some(1150.0));
        assert_eq!(parse_number("three"), Some(3.0));
        assert_eq!(parse_number("−0.5"), Some(-0.5));
        assert_eq!(parse_number("abc"), None);
    }

    #[test]
    fn canonical_number_rounds_float_noise() {
        assert_eq!(canonical_number(0.1 + 0.2), canonical_number(0.3));
        assert_eq!(canonical_number(2e-4), "0.0002");
        assert_eq!(canonical_number(360_000_000.0), "360000000");
        assert_eq!(canonical_number(30.0), "30");
    }

    #[test]
    fn ligatures_and_line_hyphens() {
        assert_eq!(normalize_extracted("e\u{FB03}cient regu-\nlarization"), "efficient regularization");
        // capitalised continuation is a real compound, keep the break
        assert_eq!(normalize_extracted("Transformer-\nXL"), "Transformer-\nXL");
    }

    #[test]
    fn dehyphenate_joins_letters_only() {
        assert_eq!(dehyphenate("Auto-Regressive 3-layer"), "AutoRegressive 3-layer");
    }

    #[test]
    fn control_chars_stripped() {
        assert_eq!(strip_control("a\u{0007}b\r\nc\td"), "ab\nc d");
    }

    #[test]
    fn tokenizer_lowercases_and_drops_stopwords() {
        let t = Tokenizer::default();
        assert_eq!(t.tokens("The LSTM and the Transformer"), vec!["lstm", "transformer"]);
    }
}
