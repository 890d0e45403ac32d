//! Line-oriented record files: one JSON object per line, UTF-8.

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

/// Parses every non-blank line of `document` as one record.
///
/// Returned pairs carry the 1-based line number so that later validation
/// can point back at the offending record.
pub fn parse_records<T: DeserializeOwned>(document: &str) -> Result<Vec<(usize, T)>, ParseError> {
    let mut out = Vec::new();
    for (idx, raw) in document.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let record = serde_json::from_str(line).map_err(|e| ParseError {
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push((idx + 1, record));
    }
    Ok(out)
}

pub fn write_records<'a, T, I>(records: I) -> String
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let mut out = String::new();
    for record in records {
        // Serializing plain data structs into a String cannot fail.
        out.push_str(&serde_json::to_string(record).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// A window over an ordered listing. The cursor is the offset of the next
/// item, rendered as a decimal string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Page<T> {
    pub items: Vec<T>,
    pub next_cursor: Option<String>,
}

impl<T> Page<T> {
    pub fn of<I: IntoIterator<Item = T>>(items: I, offset: usize, limit: usize) -> Self {
        let mut iter = items.into_iter().skip(offset);
        let items: Vec<T> = iter.by_ref().take(limit).collect();
        let more = iter.next().is_some();
        Page {
            next_cursor: more.then(|| (offset + items.len()).to_string()),
            items,
        }
    }
}
