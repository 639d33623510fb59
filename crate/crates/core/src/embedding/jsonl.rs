use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use super::{validate_row, EmbeddingError, EmbeddingSeries};

/// Reads one vector per non-empty line: either a bare JSON array of numbers
/// or an object carrying the array under `"v"` (other keys are ignored).
pub fn read_jsonl(path: impl AsRef<Path>) -> Result<EmbeddingSeries, EmbeddingError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_jsonl_str(&text, path.display().to_string())
}

pub fn read_jsonl_str(
    text: &str,
    source_id: impl Into<String>,
) -> Result<EmbeddingSeries, EmbeddingError> {
    let mut data: Vec<f32> = Vec::new();
    let mut dim: Option<usize> = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = parse_line(line, line_no)?;
        match dim {
            None => {
                if row.len() < 2 {
                    return Err(EmbeddingError::DimTooSmall(row.len()));
                }
                dim = Some(row.len());
            }
            Some(d) if d != row.len() => {
                return Err(EmbeddingError::DimMismatch {
                    line: line_no,
                    expected: d,
                    found: row.len(),
                })
            }
            Some(_) => {}
        }
        validate_row(&row, line_no)?;
        data.extend_from_slice(&row);
    }
    let dim = dim.ok_or(EmbeddingError::Empty)?;
    EmbeddingSeries::from_flat(data, dim, source_id)
}

fn parse_line(line: &str, line_no: usize) -> Result<Vec<f32>, EmbeddingError> {
    let malformed = |reason: String| EmbeddingError::MalformedLine {
        line: line_no,
        reason,
    };
    let value: Value = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
    let array = match &value {
        Value::Array(a) => a,
        Value::Object(o) => match o.get("v") {
            Some(Value::Array(a)) => a,
            Some(_) => return Err(malformed("\"v\" is not an array".into())),
            None => return Err(malformed("object without \"v\" key".into())),
        },
        _ => return Err(malformed("expected an array or an object".into())),
    };
    array
        .iter()
        .map(|x| {
            x.as_f64()
                .map(|f| f as f32)
                .ok_or_else(|| malformed(format!("non-numeric component {x}")))
        })
        .collect()
}

/// Writes one JSON array per line using the shortest decimal form that
/// round-trips each `f32`.
pub fn write_jsonl(series: &EmbeddingSeries, path: impl AsRef<Path>) -> Result<(), EmbeddingError> {
    let path = path.as_ref();
    std::fs::write(path, write_jsonl_string(series)).map_err(|source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_jsonl_string(series: &EmbeddingSeries) -> String {
    let mut out = String::new();
    for row in series.rows() {
        out.push('[');
        for (i, x) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", fmt_f32(*x));
        }
        out.push_str("]\n");
    }
    out
}

fn fmt_f32(x: f32) -> String {
    // Display for f32 is the shortest representation that parses back exactly.
    let s = format!("{x}");
    if s.contains('.') {
        s
    } else {
        format!("{s}.0")
    }
}
