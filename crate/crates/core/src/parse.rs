//! Document-to-text conversion and the worker pool that runs per-document
//! tasks.

use std::fmt::Display;
use std::panic::{AssertUnwindSafe, catch_unwind};
use std::path::Path;
use std::sync::Mutex;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::text::{normalize_extracted, strip_control};

pub const UNPARSEABLE: &str = "unparseable";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseResult {
    pub canonical_id: String,
    pub text: String,
    pub page_count: usize,
    pub extraction_warnings: Vec<String>,
    /// Seconds.
    pub duration: f64,
}

impl ParseResult {
    pub fn failed(&self) -> bool {
        self.text.trim().is_empty()
    }
}

pub struct Extracted {
    pub text: String,
    pub pages: usize,
    pub warnings: Vec<String>,
}

/// A text-extraction backend. The first backend that accepts a document
/// handles it.
pub trait TextBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn accepts(&self, path: &Path, bytes: &[u8]) -> bool;
    fn extract(&self, bytes: &[u8]) -> Result<Extracted, String>;
}

/// Passes text files through, replacing invalid UTF-8 with a warning.
pub struct PlainTextBackend;

impl TextBackend for PlainTextBackend {
    fn name(&self) -> &'static str {
        "plain-text"
    }

    fn accepts(&self, _path: &Path, bytes: &[u8]) -> bool {
        !bytes.starts_with(b"%PDF")
    }

    fn extract(&self, bytes: &[u8]) -> Result<Extracted, String> {
        let mut warnings = Vec::new();
        let text = match std::str::from_utf8(bytes) {
            Ok(s) => s.to_string(),
            Err(_) => {
                warnings.push("encoding: invalid UTF-8 replaced".to_string());
                String::from_utf8_lossy(bytes).into_owned()
            }
        };
        let pages = text.matches('\u{000C}').count() + 1;
        Ok(Extracted {
            text: strip_control(&text),
            pages,
            warnings,
        })
    }
}

/// PDF text extraction via `pdf-extract`, followed by ligature and
/// line-break hyphenation repair.
pub struct PdfBackend;

impl TextBackend for PdfBackend {
    fn name(&self) -> &'static str {
        "pdf"
    }

    fn accepts(&self, _path: &Path, bytes: &[u8]) -> bool {
        bytes.starts_with(b"%PDF")
    }

    fn extract(&self, bytes: &[u8]) -> Result<Extracted, String> {
        let pages = catch_unwind(AssertUnwindSafe(|| {
            pdf_extract::extract_text_from_mem_by_pages(bytes)
        }))
        .map_err(|_| "pdf extractor panicked".to_string())?
        .map_err(|e| e.to_string())?;
        let joined = pages.join("\n");
        Ok(Extracted {
            text: normalize_extracted(&strip_control(&joined)),
            pages: pages.len(),
            warnings: Vec::new(),
        })
    }
}

pub struct DocumentParser {
    backends: Vec<Box<dyn TextBackend>>,
}

impl Default for DocumentParser {
    fn default() -> Self {
        Self {
            backends: vec![Box::new(PdfBackend), Box::new(PlainTextBackend)],
        }
    }
}

impl DocumentParser {
    pub fn with_backends(backends: Vec<Box<dyn TextBackend>>) -> Self {
        Self { backends }
    }

    /// Best-effort conversion; never fails. Unreadable or empty documents
    /// come back with empty text and an `unparseable` warning.
    pub fn parse(&self, canonical_id: &str, path: &Path) -> ParseResult {
        let started = Instant::now();
        let mut result = ParseResult {
            canonical_id: canonical_id.to_string(),
            text: String::new(),
            page_count: 0,
            extraction_warnings: Vec::new(),
            duration: 0.0,
        };
        match std::fs::read(path) {
            Err(e) => {
                result.extraction_warnings.push(UNPARSEABLE.into());
                result.extraction_warnings.push(format!("read error: {e}"));
            }
            Ok(bytes) if bytes.is_empty() => {
                result.extraction_warnings.push(UNPARSEABLE.into());
                result.extraction_warnings.push("empty file".into());
            }
            Ok(bytes) => match self.backends.iter().find(|b| b.accepts(path, &bytes)) {
                None => result.extraction_warnings.push(UNPARSEABLE.into()),
                Some(backend) => match backend.extract(&bytes) {
                    Ok(ex) => {
                        result.text = ex.text;
                        result.page_count = ex.pages;
                        result.extraction_warnings = ex.warnings;
                        if result.text.trim().is_empty() {
                            result.text.clear();
                            result.extraction_warnings.push(UNPARSEABLE.into());
                            result.extraction_warnings.push(format!("{} backend produced no text", backend.name()));
                        }
                    }
                    Err(e) => {
                        result.extraction_warnings.push(UNPARSEABLE.into());
                        result.extraction_warnings.push(format!("{}: {e}", backend.name()));
                    }
                },
            },
        }
        result.duration = started.elapsed().as_secs_f64();
        result
    }
}

/// Converts a document with the default backends; the id is the file stem.
pub fn pdf_to_text(document: &Path) -> ParseResult {
    let id = document
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default();
    DocumentParser::default().parse(id, document)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskFailure {
    pub id: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ParallelOutcome<O> {
    /// Successful outputs sorted by id.
    pub outputs: Vec<(String, O)>,
    /// Failed tasks sorted by id.
    pub failures: Vec<TaskFailure>,
}

/// Runs `task` once per item on a pool of `workers` threads pulling from a
/// shared queue. A failing or panicking task is recorded and never affects
/// the others. Results are sorted by `key`, so output is independent of
/// scheduling.
pub fn parallel_map<T, O, E, K, F>(items: &[T], workers: usize, key: K, task: F) -> ParallelOutcome<O>
where
    T: Sync,
    O: Send,
    E: Display,
    K: Fn(&T) -> String + Sync,
    F: Fn(&T) -> Result<O, E> + Sync,
{
    let workers = workers.max(1).min(items.len().max(1));
    let next = AtomicUsize::new(0);
    let done: Mutex<Vec<(String, Result<O, String>)>> = Mutex::new(Vec::with_capacity(items.len()));

    let run_one = |item: &T| -> (String, Result<O, String>) {
        let id = key(item);
        let result = match catch_unwind(AssertUnwindSafe(|| task(item))) {
            Ok(Ok(o)) => Ok(o),
            Ok(Err(e)) => Err(e.to_string()),
            Err(panic) => Err(panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "task panicked".into())),
        };
        (id, result)
    };

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(item) = items.get(i) else { break };
                    let entry = run_one(item);
                    done.lock().unwrap().push(entry);
                }
            });
        }
    });

    let mut done = done.into_inner().unwrap();
    done.sort_by(|a, b| a.0.cmp(&b.0));
    let mut outputs = Vec::new();
    let mut failures = Vec::new();
    for (id, r) in done {
        match r {
            Ok(o) => outputs.push((id, o)),
            Err(message) => failures.push(TaskFailure { id, message }),
        }
    }
    ParallelOutcome { outputs, failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn zero_byte_file_is_unparseable() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("empty.pdf");
        std::fs::File::create(&p).unwrap();
        let r = pdf_to_text(&p);
        assert!(r.text.is_empty());
        assert_eq!(r.extraction_warnings[0], UNPARSEABLE);
    }

    #[test]
    fn missing_file_is_unparseable() {
        let r = pdf_to_text(Path::new("/definitely/not/here.pdf"));
        assert!(r.failed());
        assert!(r.extraction_warnings.contains(&UNPARSEABLE.to_string()));
    }

    #[test]
    fn text_passes_through_unchanged() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("paper.txt");
        let body = "Title\n\nWe use a learning rate 0.001 with a 3-layer LSTM.\n";
        std::fs::write(&p, body).unwrap();
        let r = pdf_to_text(&p);
        assert_eq!(r.text, body);
        assert_eq!(r.canonical_id, "paper");
        assert!(r.extraction_warnings.is_empty());
    }

    #[test]
    fn corrupt_pdf_is_flagged_not_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.pdf");
        let mut f = std::fs::File::create(&p).unwrap();
        f.write_all(b"%PDF-1.4\nthis is not really a pdf").unwrap();
        let r = pdf_to_text(&p);
        assert!(r.failed());
        assert!(r.extraction_warnings.contains(&UNPARSEABLE.to_string()));
    }

    #[test]
    fn invalid_utf8_is_flagged() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("latin1.txt");
        std::fs::write(&p, b"caf\xe9 au lait").unwrap();
        let r = pdf_to_text(&p);
        assert!(r.text.starts_with("caf"));
        assert!(r.extraction_warnings[0].starts_with("encoding"));
    }

    #[test]
    fn isolates_failures() {
        let items: Vec<u32> = (0..100).collect();
        let out = parallel_map(&items, 8, |i| format!("{i:03}"), |&i| {
            if i == 37 {
                panic!("boom");
            }
            Ok::<_, String>(i * 2)
        });
        assert_eq!(out.outputs.len(), 99);
        assert_eq!(out.failures, vec![TaskFailure { id: "037".into(), message: "boom".into() }]);
    }

    #[test]
    fn output_independent_of_worker_count() {
        let items: Vec<u32> = (0..100).rev().collect();
        let key = |i: &u32| format!("{i:03}");
        let one = parallel_map(&items, 1, key, |&i| Ok::<_, String>(i + 1));
        let eight = parallel_map(&items, 8, key, |&i| Ok::<_, String>(i + 1));
        assert_eq!(one.outputs, eight.outputs);
        assert_eq!(one.outputs.first().map(|o| o.0.as_str()), Some("000"));
    }

    #[test]
    fn errors_are_collected() {
        let items = vec!["a", "b", "c"];
        let out = parallel_map(&items, 2, |s| s.to_string(), |s| {
            if *s == "b" { Err("bad") } else { Ok(s.len()) }
        });
        assert_eq!(out.outputs.len() + out.failures.len(), items.len());
        assert_eq!(out.failures[0].message, "bad");
    }
}
