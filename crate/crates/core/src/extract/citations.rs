//! Citation markers and reference-list resolution.

use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;

use crate::text::{Span, sentence_spans};

use super::types::{CitationLink, ReferenceEntry};

static REFS_HEADING: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?im)^[ \t]*(?:\d+\.?[ \t]+)?(?:references|bibliography|works cited|literature cited)[ \t]*:?[ \t]*$")
        .unwrap()
});
static NUMBERED_ENTRY: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*(?:\[(\d{1,4})\]|(\d{1,4})\.)\s+(.*)$").unwrap());
static BIBITEM: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*\\bibitem(?:\[[^\]]*\])?\{([^}]+)\}\s*(.*)$").unwrap());
static YEAR: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b((?:19|20)\d{2})([a-z]?)\b").unwrap());

static NUMERIC_MARKER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\[(\d{1,4}(?:\s*[-–,]\s*\d{1,4})*)\]").unwrap()
});
static PAREN_GROUP: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\(([^()]{3,300})\)").unwrap());
static AUTHOR_YEAR: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"^\s*(?:e\.g\.,?\s*|see\s+(?:also\s+)?|cf\.\s*)?(?P<name>\p{Lu}[\p{L}'’-]+(?:\s+(?:and|&)\s+\p{Lu}[\p{L}'’-]+|\s+et\s+al\.?)?),?\s+(?P<year>(?:19|20)\d{2}[a-z]?)\s*$",
    )
    .unwrap()
});
static NARRATIVE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"\b(?P<name>\p{Lu}[\p{L}'’-]+(?:\s+(?:and|&)\s+\p{Lu}[\p{L}'’-]+|\s+et\s+al\.?)?)\s+\((?P<year>(?:19|20)\d{2}[a-z]?)\)",
    )
    .unwrap()
});
static KEY_MARKER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"[\[{](?P<key>[a-z][a-z'-]*(?:19|20)\d{2}[a-z]*(?:[,;]\s*[a-z][a-z'-]*(?:19|20)\d{2}[a-z]*)*)[\]}]")
        .unwrap()
});
static LATEX_CITE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\\(?:cite|citep|citet|citealp|citeauthor|citeyear|parencite|textcite)\*?(?:\[[^\]]*\])*\{(?P<keys>[^}]+)\}")
        .unwrap()
});
static KEY_PARTS: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?P<name>[a-z][a-z'-]*?)(?P<year>(?:19|20)\d{2})").unwrap());

/// Locates the reference section: the last heading named "References" (or
/// similar). Returns the byte offset where the heading line begins.
pub fn find_reference_section(text: &str) -> Option<usize> {
    REFS_HEADING.find_iter(text).last().map(|m| m.start())
}

fn ascii_fold(s: &str) -> String {
    s.chars()
        .filter_map(|c| {
            let c = match c {
                'á' | 'à' | 'â' | 'ä' | 'ã' | 'å' => 'a',
                'é' | 'è' | 'ê' | 'ë' => 'e',
                'í' | 'ì' | 'î' | 'ï' => 'i',
                'ó' | 'ò' | 'ô' | 'ö' | 'õ' | 'ø' => 'o',
                'ú' | 'ù' | 'û' | 'ü' => 'u',
                'ñ' => 'n',
                'ç' => 'c',
                c => c,
            };
            c.is_ascii_alphabetic().then(|| c.to_ascii_lowercase())
        })
        .collect()
}

/// `surname + year (+ suffix)`, e.g. `merity2017`, `dai2019b`.
pub fn reference_key(surname: &str, year: &str) -> String {
    format!("{}{}", ascii_fold(surname), year)
}

/// First author's surname from the start of a reference entry.
fn first_surname(entry: &str) -> Option<String> {
    let end = entry
        .find([',', ';', '(', ':'])
        .into_iter()
        .chain(entry.find(" and "))
        .chain(entry.find(" & "))
        .chain(entry.find(". ").filter(|&i| {
            // a sentence period, not an initial
            entry[..i].rsplit(' ').next().is_some_and(|w| w.chars().count() > 1)
        }))
        .min()
        .unwrap_or(entry.len());
    let segment = &entry[..end];
    let words: Vec<&str> = segment
        .split_whitespace()
        .filter(|w| {
            let letters = w.trim_matches(|c: char| !c.is_alphabetic());
            !(letters.chars().count() <= 1 || (w.ends_with('.') && letters.chars().count() <= 2))
        })
        .collect();
    let candidate = if segment.contains(',') {
        words.first()
    } else {
        words.last()
    }?;
    let name = candidate.trim_matches(|c: char| !c.is_alphabetic());
    (!name.is_empty()).then(|| name.to_string())
}

fn entry_from_text(label: Option<String>, text: &str) -> Option<ReferenceEntry> {
    let text = text.split_whitespace().collect::<Vec<_>>().join(" ");
    if text.is_empty() {
        return None;
    }
    let surname = first_surname(&text)?;
    let year = YEAR.captures(&text)?;
    Some(ReferenceEntry {
        label,
        key: reference_key(&surname, &format!("{}{}", &year[1], &year[2])),
        text,
    })
}

/// Parses a reference list. Entries are numbered (`[3] ...` or `3. ...`),
/// `\bibitem{key}` lines, or one entry per paragraph/line otherwise.
/// Unnumbered continuation lines are folded into the preceding entry.
pub fn parse_reference_list(section: &str) -> Vec<ReferenceEntry> {
    let mut raw: Vec<(Option<String>, String)> = Vec::new();
    let mut numbered = false;
    for line in section.lines().skip_while(|l| !REFS_HEADING.is_match(l)).skip(1) {
        if line.trim().is_empty() {
            if !numbered {
                raw.push((None, String::new()));
            }
            continue;
        }
        if let Some(c) = NUMBERED_ENTRY.captures(line) {
            numbered = true;
            let label = c.get(1).or(c.get(2)).unwrap().as_str().to_string();
            raw.push((Some(label), c[3].to_string()));
        } else if let Some(c) = BIBITEM.captures(line) {
            numbered = true;
            raw.push((Some(c[1].trim().to_string()), c[2].to_string()));
        } else if let Some(last) = raw.last_mut()
            && (numbered || !last.1.is_empty())
            && !starts_new_entry(line, numbered)
        {
            last.1.push(' ');
            last.1.push_str(line.trim());
        } else {
            raw.push((None, line.trim().to_string()));
        }
    }
    raw.into_iter()
        .filter_map(|(label, text)| entry_from_text(label, &text))
        .collect()
}

fn starts_new_entry(line: &str, numbered: bool) -> bool {
    // In unnumbered lists each line that opens with a capitalised surname and
    // comma starts a new entry.
    !numbered
        && line
            .trim_start()
            .split(',')
            .next()
            .is_some_and(|w| w.chars().next().is_some_and(char::is_uppercase) && !w.contains(' '))
}

#[derive(Debug, Clone, Default)]
pub struct ReferenceIndex {
    by_label: BTreeMap<String, String>,
    by_key: BTreeMap<String, String>,
}

impl ReferenceIndex {
    pub fn new(entries: &[ReferenceEntry]) -> Self {
        let mut idx = Self::default();
        for e in entries {
            if let Some(l) = &e.label {
                idx.by_label.insert(l.clone(), e.key.clone());
                // `\bibitem{vaswani2017attention}` also resolves by its
                // author-year prefix
                if let Some(c) = KEY_PARTS.captures(l) {
                    idx.by_label
                        .entry(reference_key(&c["name"], &c["year"]))
                        .or_insert_with(|| e.key.clone());
                }
            }
            idx.by_key.entry(e.key.clone()).or_insert_with(|| e.key.clone());
            // "2020a" entries also answer to "2020"
            let trimmed = e.key.trim_end_matches(|c: char| c.is_ascii_lowercase());
            if trimmed.len() < e.key.len() && trimmed.ends_with(|c: char| c.is_ascii_digit()) {
                idx.by_key.entry(trimmed.to_string()).or_insert_with(|| e.key.clone());
            }
        }
        idx
    }

    fn label(&self, label: &str) -> Option<String> {
        self.by_label.get(label).cloned()
    }

    fn author_year(&self, surname: &str, year: &str) -> Option<String> {
        self.by_key.get(&reference_key(surname, year)).cloned()
    }

    fn latex_key(&self, key: &str) -> Option<String> {
        self.by_label.get(key).cloned().or_else(|| {
            let c = KEY_PARTS.captures(key)?;
            self.author_year(&c["name"], &c["year"])
        })
    }
}

fn sentence_of(sentences: &[Span], pos: usize) -> Span {
    sentences
        .iter()
        .find(|s| s.start <= pos && pos < s.end)
        .copied()
        .unwrap_or(Span::new(pos, pos))
}

fn expand_numeric(body: &str) -> Vec<String> {
    let mut out = Vec::new();
    for part in body.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once(['-', '–']) {
            if let (Ok(a), Ok(b)) = (a.trim().parse::<u32>(), b.trim().parse::<u32>())
                && a <= b
                && b - a < 50
            {
                out.extend((a..=b).map(|n| n.to_string()));
            }
        } else if let Ok(n) = part.parse::<u32>() {
            out.push(n.to_string());
        }
    }
    out
}

fn surname_of_marker(name: &str) -> &str {
    name.split_whitespace().next().unwrap_or(name)
}

/// Finds citation markers in the body (text before the reference section)
/// and resolves them against the parsed reference list.
pub fn extract_citations_with_refs(text: &str) -> (Vec<CitationLink>, Vec<ReferenceEntry>) {
    let refs_at = find_reference_section(text);
    let body = &text[..refs_at.unwrap_or(text.len())];
    let references = refs_at
        .map(|at| parse_reference_list(&text[at..]))
        .unwrap_or_default();
    let index = ReferenceIndex::new(&references);
    let sentences = sentence_spans(body);
    let mut links: Vec<CitationLink> = Vec::new();
    let mut taken: Vec<Span> = Vec::new();

    let push = |marker_span: Span, resolved: Option<String>, links: &mut Vec<CitationLink>| {
        links.push(CitationLink {
            marker: marker_span.slice(text).to_string(),
            resolved_key: resolved,
            marker_span,
            statement_span: sentence_of(&sentences, marker_span.start),
        });
    };

    for m in LATEX_CITE.captures_iter(body) {
        let whole = m.get(0).unwrap();
        let span = Span::new(whole.start(), whole.end());
        taken.push(span);
        for key in m["keys"].split(',').map(str::trim).filter(|k| !k.is_empty()) {
            push(span, index.latex_key(key), &mut links);
        }
    }

    for m in NUMERIC_MARKER.captures_iter(body) {
        let whole = m.get(0).unwrap();
        let span = Span::new(whole.start(), whole.end());
        if taken.iter().any(|t| t.overlaps(&span)) {
            continue;
        }
        let labels = expand_numeric(&m[1]);
        if labels.is_empty() || labels.iter().any(|l| l == "0") {
            continue;
        }
        taken.push(span);
        for label in labels {
            push(span, index.label(&label), &mut links);
        }
    }

    for m in KEY_MARKER.captures_iter(body) {
        let whole = m.get(0).unwrap();
        let span = Span::new(whole.start(), whole.end());
        if taken.iter().any(|t| t.overlaps(&span)) {
            continue;
        }
        taken.push(span);
        for key in m["key"].split([',', ';']).map(str::trim) {
            push(span, index.latex_key(key), &mut links);
        }
    }

    for m in NARRATIVE.captures_iter(body) {
        let whole = m.get(0).unwrap();
        let span = Span::new(whole.start(), whole.end());
        if taken.iter().any(|t| t.overlaps(&span)) {
            continue;
        }
        taken.push(span);
        let resolved = index.author_year(surname_of_marker(&m["name"]), &m["year"]);
        push(span, resolved, &mut links);
    }

    for m in PAREN_GROUP.captures_iter(body) {
        let inner = m.get(1).unwrap();
        let group = Span::new(m.get(0).unwrap().start(), m.get(0).unwrap().end());
        if taken.iter().any(|t| t.overlaps(&group)) {
            continue;
        }
        let mut offset = inner.start();
        for piece in inner.as_str().split(';') {
            let piece_start = offset;
            offset += piece.len() + 1;
            let Some(c) = AUTHOR_YEAR.captures(piece) else { continue };
            let name = c.name("name").unwrap();
            let year = c.name("year").unwrap();
            let span = Span::new(piece_start + name.start(), piece_start + year.end());
            let resolved = index.author_year(surname_of_marker(name.as_str()), year.as_str());
            push(span, resolved, &mut links);
        }
    }

    links.sort_by(|a, b| {
        (a.marker_span, &a.resolved_key).cmp(&(b.marker_span, &b.resolved_key))
    });
    links.dedup_by(|a, b| a.marker_span == b.marker_span && a.resolved_key == b.resolved_key);
    (links, references)
}

pub fn extract_citations(text: &str) -> Vec<CitationLink> {
    extract_citations_with_refs(text).0
}
