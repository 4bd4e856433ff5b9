//! Semantic Scholar Graph API: paper search URLs and JSON page parsing.

use reqwest::Url;
use serde_json::Value;

use crate::config::SourceKind;

use super::record::PaperRecord;

pub const DEFAULT_BASE: &str = "https://api.semanticscholar.org/graph/v1/paper/search";
const FIELDS: &str = "title,authors,year,venue,externalIds,abstract,openAccessPdf";

pub fn query_url(base: &str, query: &str, years: (i32, i32), offset: usize, limit: usize) -> String {
    let year = format!("{}-{}", years.0, years.1);
    let offset = offset.to_string();
    let limit = limit.to_string();
    Url::parse_with_params(
        base,
        [
            ("query", query.trim()),
            ("year", year.as_str()),
            ("offset", offset.as_str()),
            ("limit", limit.as_str()),
            ("fields", FIELDS),
        ],
    )
    .map(String::from)
    .unwrap_or_else(|_| base.to_string())
}

#[derive(Debug, Default)]
pub struct SearchPage {
    pub records: Vec<PaperRecord>,
    pub skipped: Vec<String>,
    pub next_offset: Option<usize>,
    pub total: Option<usize>,
    pub entries_seen: usize,
}

fn non_empty(v: &Value) -> Option<String> {
    v.as_str()
        .map(|s| s.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|s| !s.is_empty())
}

pub fn parse_page(body: &str) -> Result<SearchPage, String> {
    let json: Value =
        serde_json::from_str(body).map_err(|e| format!("malformed search response: {e}"))?;
    let data = json
        .get("data")
        .and_then(Value::as_array)
        .cloned()
        .unwrap_or_default();
    let mut page = SearchPage {
        next_offset: json.get("next").and_then(Value::as_u64).map(|n| n as usize),
        total: json.get("total").and_then(Value::as_u64).map(|n| n as usize),
        ..Default::default()
    };

    for item in &data {
        page.entries_seen += 1;
        let Some(paper_id) = item.get("paperId").and_then(non_empty) else {
            page.skipped.push("entry without paperId".into());
            continue;
        };
        let Some(title) = item.get("title").and_then(non_empty) else {
            page.skipped.push(format!("s2:{paper_id}: missing title"));
            continue;
        };
        let year = match item.get("year") {
            Some(Value::Number(n)) => n.as_i64().map(|y| y as i32),
            _ => None,
        };
        let Some(year) = year else {
            page.skipped.push(format!("s2:{paper_id}: missing or malformed year"));
            continue;
        };

        let mut rec = PaperRecord::new(SourceKind::SemanticScholar, title);
        rec.source_id = Some(paper_id);
        rec.year = Some(year);
        rec.venue = item.get("venue").and_then(non_empty);
        rec.abstract_text = item.get("abstract").and_then(non_empty);
        rec.doi = item
            .get("externalIds")
            .and_then(|e| e.get("DOI"))
            .and_then(non_empty);
        rec.authors = item
            .get("authors")
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(|x| x.get("name").and_then(non_empty)).collect())
            .unwrap_or_default();
        rec.pdf_url = item
            .get("openAccessPdf")
            .and_then(|p| p.get("url"))
            .and_then(non_empty);
        rec.refresh_id();
        page.records.push(rec);
    }
    Ok(page)
}
