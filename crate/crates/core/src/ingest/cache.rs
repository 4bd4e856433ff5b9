use std::fs;
use std::io::Write;
use std::path::Path;

use crate::config::SourceKind;

use super::IngestError;
use super::record::{PaperRecord, safe_file_stem};
use super::transport::{RateLimiter, RetryPolicy, Transport, get_with_retry};

pub const MANIFEST_FILE: &str = "manifest.jsonl";

/// Writes one record per line, sorted by canonical id.
pub fn write_manifest(dir: &Path, records: &[PaperRecord]) -> Result<(), IngestError> {
    fs::create_dir_all(dir).map_err(|e| IngestError::io(dir, e))?;
    let mut sorted: Vec<&PaperRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.canonical_id.cmp(&b.canonical_id));
    let mut out = String::new();
    for r in sorted {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, out).map_err(|e| IngestError::io(&path, e))
}

pub fn read_manifest(dir: &Path) -> Result<Vec<PaperRecord>, IngestError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| IngestError::io(&path, e))?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: PaperRecord = serde_json::from_str(line).map_err(|e| IngestError::Manifest {
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(rec);
    }
    Ok(records)
}

/// Loads a directory of documents. A manifest, when present, is
/// authoritative; otherwise every `.txt` and `.pdf` file becomes a record
/// keyed by its file stem.
pub fn load_local_corpus(dir: &Path) -> Result<Vec<PaperRecord>, IngestError> {
    if dir.join(MANIFEST_FILE).exists() {
        return read_manifest(dir);
    }
    let mut files: Vec<_> = fs::read_dir(dir)
        .map_err(|e| IngestError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("txt") | Some("pdf")
            )
        })
        .collect();
    files.sort();

    let mut records = Vec::new();
    for path in files {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        let mut title = stem.clone();
        let mut abstract_text = None;
        if path.extension().and_then(|e| e.to_str()) == Some("txt") {
            let text = fs::read_to_string(&path).unwrap_or_default();
            if let Some(first) = text.lines().map(str::trim).find(|l| !l.is_empty()) {
                title = first.to_string();
            }
            abstract_text = crate::extract::find_abstract(&text);
        }
        let mut rec = PaperRecord::new(SourceKind::LocalFile, title).with_source_id(stem);
        rec.abstract_text = abstract_text;
        rec.pdf_path = path.file_name().map(Into::into);
        records.push(rec);
    }
    Ok(records)
}

/// Ensures the record's document is in `cache_dir`. A cached file short-
/// circuits all network access. Download failures leave the status alone
/// and flag the record for manual review.
pub fn fetch_document(
    mut record: PaperRecord,
    cache_dir: &Path,
    transport: &dyn Transport,
    limiter: &RateLimiter,
    retry: RetryPolicy,
) -> PaperRecord {
    if let Some(rel) = &record.pdf_path
        && cache_dir.join(rel).is_file()
    {
        return record;
    }
    let stem = safe_file_stem(&record.canonical_id);
    for ext in ["pdf", "txt"] {
        let name = format!("{stem}.{ext}");
        if cache_dir.join(&name).is_file() {
            record.pdf_path = Some(name.into());
            return record;
        }
    }

    let Some(url) = record.pdf_url.clone() else {
        log::warn!("{}: no document URL and nothing cached", record.canonical_id);
        record.flag("no document available");
        return record;
    };
    match get_with_retry(transport, limiter, retry, &url) {
        Ok(resp) => {
            let name = format!("{stem}.pdf");
            let path = cache_dir.join(&name);
            let written = fs::create_dir_all(cache_dir).and_then(|_| {
                let mut f = fs::File::create(&path)?;
                f.write_all(&resp.body)
            });
            match written {
                Ok(()) => record.pdf_path = Some(name.into()),
                Err(e) => {
                    log::error!("{}: cannot cache document: {e}", record.canonical_id);
                    record.flag(format!("cache write failed: {e}"));
                }
            }
        }
        Err(e) => {
            log::error!("{}: download failed: {e}", record.canonical_id);
            record.flag(format!("download failed: {e}"));
        }
    }
    record
}
