//! Header heuristics: title, authors, year, venue, abstract.

use std::sync::LazyLock;

use regex::Regex;

use super::types::Metadata;

/// Lines scanned for header fields when no abstract heading bounds them.
const HEADER_LINES: usize = 25;

static ABSTRACT_HEADING: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\s*(?:\d+\.?\s+)?abstract\b\s*[:.—-]?\s*(?P<rest>.*)$").unwrap());
static YEAR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b(19[5-9]\d|20[0-4]\d)\b").unwrap());
static VENUE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(proceedings|conference|workshop|journal|transactions|symposium|neurips|nips|icml|iclr|acl|emnlp|naacl|ismir|aaai|ijcai|interspeech|icassp|preprint)\b")
        .unwrap()
});
static NOT_TITLE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^(?:arxiv:|doi:|https?://|preprint|under review|published|draft|page\s+\d)").unwrap()
});
static SECTION_HEADING: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^\s*(?:\d+(?:\.\d+)*\.?\s+)?(?:introduction|background|related work|method|methods|experiments?|results|conclusions?|references)\s*$")
        .unwrap()
});

fn looks_like_heading(line: &str) -> bool {
    let l = line.trim();
    !l.is_empty()
        && l.len() <= 200
        && l.split_whitespace().count() <= 25
        && !l.ends_with(['.', ',', ';'])
        && l.chars().next().is_some_and(|c| c.is_uppercase() || c.is_ascii_digit())
        && l.chars().any(char::is_alphabetic)
        && !NOT_TITLE.is_match(l)
        && !SECTION_HEADING.is_match(l)
        && !ABSTRACT_HEADING.is_match(l)
}

fn parse_authors(line: &str) -> Vec<String> {
    let cleaned: String = line
        .chars()
        .filter(|c| !c.is_ascii_digit() && !matches!(c, '*' | '†' | '‡' | '§' | '^'))
        .collect();
    let parts: Vec<String> = cleaned
        .split([',', ';'])
        .flat_map(|p| p.split(" and "))
        .flat_map(|p| p.split(" & "))
        .map(|p| p.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|p| !p.is_empty())
        .collect();
    let plausible = |p: &String| {
        let words: Vec<&str> = p.split_whitespace().collect();
        (2..=4).contains(&words.len())
            && words.iter().all(|w| w.chars().next().is_some_and(char::is_uppercase))
    };
    if !parts.is_empty() && parts.iter().all(plausible) {
        parts
    } else {
        Vec::new()
    }
}

/// The paragraph following an "Abstract" heading, or the text after an
/// inline "Abstract:" label.
pub fn find_abstract(text: &str) -> Option<String> {
    let lines: Vec<&str> = text.lines().collect();
    let at = lines.iter().position(|l| ABSTRACT_HEADING.is_match(l))?;
    let rest = ABSTRACT_HEADING.captures(lines[at])?["rest"].trim().to_string();
    let mut parts: Vec<&str> = Vec::new();
    if !rest.is_empty() {
        parts.push(rest.as_str());
    }
    for l in lines.iter().skip(at + 1) {
        if l.trim().is_empty() {
            if parts.is_empty() {
                continue;
            }
            break;
        }
        if SECTION_HEADING.is_match(l) {
            break;
        }
        parts.push(l.trim());
    }
    let joined = parts.join(" ");
    (!joined.is_empty()).then_some(joined)
}

/// Header heuristics. Missing fields stay empty and add a warning.
pub fn extract_metadata(text: &str) -> (Metadata, Vec<String>) {
    let mut meta = Metadata::default();
    let mut warnings = Vec::new();
    let lines: Vec<&str> = text.lines().collect();
    let header_end = lines
        .iter()
        .position(|l| ABSTRACT_HEADING.is_match(l) || SECTION_HEADING.is_match(l))
        .unwrap_or(HEADER_LINES)
        .min(lines.len());
    let header = &lines[..header_end];

    let title_at = header.iter().position(|l| looks_like_heading(l));
    if let Some(i) = title_at {
        meta.title = header[i].trim().to_string();
        if let Some(next) = header[i + 1..].iter().find(|l| !l.trim().is_empty()) {
            meta.authors = parse_authors(next);
        }
    }
    meta.year = header
        .iter()
        .find_map(|l| YEAR.find(l))
        .and_then(|m| m.as_str().parse().ok());
    meta.venue = header
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != title_at)
        .map(|(_, l)| l.trim())
        .find(|l| VENUE.is_match(l) && l.split_whitespace().count() <= 20)
        .map(|l| l.trim_end_matches('.').to_string());
    meta.abstract_text = find_abstract(text);

    for (missing, field) in [
        (meta.title.is_empty(), "title"),
        (meta.authors.is_empty(), "authors"),
        (meta.year.is_none(), "year"),
        (meta.abstract_text.is_none(), "abstract"),
    ] {
        if missing {
            warnings.push(format!("metadata: no {field} found"));
        }
    }
    (meta, warnings)
}

/// Source metadata (from an index API) overrides header parsing field by
/// field wherever it is populated.
pub fn merge_metadata(parsed: Metadata, api: Option<&Metadata>) -> Metadata {
    let Some(api) = api else { return parsed };
    Metadata {
        title: if api.title.is_empty() { parsed.title } else { api.title.clone() },
        authors: if api.authors.is_empty() { parsed.authors } else { api.authors.clone() },
        year: api.year.or(parsed.year),
        venue: api.venue.clone().or(parsed.venue),
        abstract_text: api.abstract_text.clone().or(parsed.abstract_text),
    }
}
