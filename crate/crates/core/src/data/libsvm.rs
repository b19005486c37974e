//! LIBSVM text format: `label idx:val idx:val ...` with 1-based, strictly
//! increasing indices. Blank lines and `#` comments are skipped.

use std::io::BufRead;
use std::path::Path;

use super::{Dataset, Provenance};
use crate::error::{Error, Result};

struct SparseRow {
    label: f64,
    entries: Vec<(usize, f64)>,
}

/// Parses LIBSVM text. The resulting dimension is `max(d_hint, largest index)`.
pub fn parse_libsvm<R: BufRead>(reader: R, d_hint: Option<usize>) -> Result<Dataset> {
    parse_with_provenance(reader, d_hint, Provenance::Text)
}

pub fn parse_libsvm_str(text: &str, d_hint: Option<usize>) -> Result<Dataset> {
    parse_libsvm(text.as_bytes(), d_hint)
}

pub fn load_libsvm(path: impl AsRef<Path>, d_hint: Option<usize>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Parse {
        line: 0,
        message: format!("cannot open {}: {e}", path.display()),
    })?;
    parse_with_provenance(
        std::io::BufReader::new(file),
        d_hint,
        Provenance::File {
            path: path.display().to_string(),
        },
    )
}

fn parse_with_provenance<R: BufRead>(
    mut reader: R,
    d_hint: Option<usize>,
    provenance: Provenance,
) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut max_index = 0usize;
    let mut buf = Vec::new();
    let mut line_no = 0usize;
    loop {
        buf.clear();
        let read = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| Error::Parse {
                line: line_no + 1,
                message: e.to_string(),
            })?;
        if read == 0 {
            break;
        }
        line_no += 1;
        let line = std::str::from_utf8(&buf).map_err(|_| Error::Parse {
            line: line_no,
            message: "line is not valid UTF-8".into(),
        })?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let row = parse_line(content).map_err(|message| Error::Parse {
            line: line_no,
            message,
        })?;
        if let Some(&(last, _)) = row.entries.last() {
            max_index = max_index.max(last);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Empty("LIBSVM input has no examples".into()));
    }
    let dim = d_hint.unwrap_or(0).max(max_index);
    if dim == 0 {
        return Err(Error::Parse {
            line: line_no,
            message: "no feature indices and no dimension hint".into(),
        });
    }
    let mut features = vec![0.0; rows.len() * dim];
    let mut labels = Vec::with_capacity(rows.len());
    for (i, row) in rows.into_iter().enumerate() {
        for (idx, val) in row.entries {
            features[i * dim + idx - 1] = val;
        }
        labels.push(row.label);
    }
    Dataset::from_parts(dim, features, labels, provenance)
}

fn parse_line(line: &str) -> std::result::Result<SparseRow, String> {
    let mut tokens = line.split_whitespace();
    let label_tok = tokens.next().ok_or("missing label")?;
    let label = parse_finite(label_tok).map_err(|_| format!("invalid label `{label_tok}`"))?;
    let mut entries = Vec::new();
    let mut prev = 0usize;
    for tok in tokens {
        let (idx_s, val_s) = tok
            .split_once(':')
            .ok_or_else(|| format!("expected `index:value`, found `{tok}`"))?;
        let idx: usize = idx_s
            .parse()
            .map_err(|_| format!("invalid feature index `{idx_s}`"))?;
        if idx < 1 {
            return Err(format!("feature index {idx} < 1"));
        }
        if idx <= prev {
            return Err(format!(
                "feature index {idx} does not increase (previous {prev})"
            ));
        }
        let val = parse_finite(val_s).map_err(|_| format!("invalid feature value `{val_s}`"))?;
        entries.push((idx, val));
        prev = idx;
    }
    Ok(SparseRow { label, entries })
}

fn parse_finite(tok: &str) -> std::result::Result<f64, ()> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(()),
    }
}
