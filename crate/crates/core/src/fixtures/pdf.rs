//! A minimal PDF writer: uncompressed content streams in a standard font,
//! enough for text extraction tests without shipping real papers.

use std::fmt::Write as _;

/// Sentence placed on the second page of [`sentinel_pdf`].
pub const PDF_SENTINEL: &str = "The sentinel sentence proves that the second page was read.";

const LINE_CHARS: usize = 86;

fn escape(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    for c in line.chars() {
        match c {
            '(' | ')' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            c if c.is_ascii() && !c.is_ascii_control() => out.push(c),
            _ => out.push('?'),
        }
    }
    out
}

fn wrap(text: &str) -> Vec<String> {
    let mut lines = Vec::new();
    for para in text.split('\n') {
        let mut line = String::new();
        for word in para.split_whitespace() {
            if !line.is_empty() && line.len() + 1 + word.len() > LINE_CHARS {
                lines.push(std::mem::take(&mut line));
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(word);
        }
        lines.push(line);
    }
    lines
}

/// One page per element of `pages`, Helvetica 10pt, ASCII only (other
/// characters become `?`).
pub fn write_pdf(pages: &[&str]) -> Vec<u8> {
    let n = pages.len();
    // objects: 1 catalog, 2 page tree, 3 font, then a page and its content
    // stream for each page
    let mut objects: Vec<String> = Vec::new();
    objects.push("<< /Type /Catalog /Pages 2 0 R >>".into());
    let kids: Vec<String> = (0..n).map(|i| format!("{} 0 R", 4 + 2 * i)).collect();
    objects.push(format!("<< /Type /Pages /Kids [{}] /Count {n} >>", kids.join(" ")));
    objects.push("<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica /Encoding /WinAnsiEncoding >>".into());
    for (i, page) in pages.iter().enumerate() {
        let mut stream = String::from("BT\n/F1 10 Tf\n12 TL\n56 760 Td\n");
        for line in wrap(page) {
            let _ = writeln!(stream, "({}) Tj T*", escape(&line));
        }
        stream.push_str("ET\n");
        objects.push(format!(
            "<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] /Resources << /Font << /F1 3 0 R >> >> /Contents {} 0 R >>",
            5 + 2 * i
        ));
        objects.push(format!("<< /Length {} >>\nstream\n{stream}endstream", stream.len()));
    }

    let mut out = String::from("%PDF-1.4\n");
    let mut offsets = Vec::with_capacity(objects.len());
    for (i, body) in objects.iter().enumerate() {
        offsets.push(out.len());
        let _ = write!(out, "{} 0 obj\n{body}\nendobj\n", i + 1);
    }
    let xref = out.len();
    let _ = write!(out, "xref\n0 {}\n0000000000 65535 f \n", objects.len() + 1);
    for off in offsets {
        let _ = writeln!(out, "{off:010} 00000 n ");
    }
    let _ = write!(
        out,
        "trailer\n<< /Size {} /Root 1 0 R >>\nstartxref\n{xref}\n%%EOF\n",
        objects.len() + 1
    );
    out.into_bytes()
}

/// Two pages; the second ends with [`PDF_SENTINEL`].
pub fn sentinel_pdf() -> Vec<u8> {
    write_pdf(&[
        "Event Models for Piano Performance\nAbstract\nWe model piano performances as autoregressive event streams.\n1 Introduction\nTimed events keep expressive nuance that score grids lose.",
        &format!("2 Experimental Setup\nWe train for 40 epochs with a batch size of 16.\n{PDF_SENTINEL}"),
    ])
}
