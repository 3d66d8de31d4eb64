//! CSV and JSON output shared by the reports.

use std::io::Write;

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    kind: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON of `body` with `"schema"` and `"kind"` keys in front.
pub fn to_json<T: Serialize>(kind: &str, body: &T) -> Result<String, ReportError> {
    let mut s = serde_json::to_string_pretty(&Envelope {
        schema: SCHEMA_VERSION,
        kind,
        body,
    })?;
    s.push('\n');
    Ok(s)
}

/// Header row plus one record per row. Floats use the shortest round-trip
/// form with `.` as separator.
pub fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, ReportError> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
