//! Minimal JSON-lines helpers shared by the dump/load routines.

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;

pub(crate) fn write_records<W: Write, T: Serialize>(
    out: &mut W,
    records: impl IntoIterator<Item = T>,
) -> std::io::Result<()> {
    for record in records {
        let line = serde_json::to_string(&record).expect("record serializes");
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Reads one record per non-empty line, reporting the 1-based line number on
/// parse failure.
pub(crate) fn read_records<R: BufRead, T: DeserializeOwned>(
    input: R,
) -> Result<Vec<T>, String> {
    let mut records = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line.map_err(|e| format!("line {}: {e}", idx + 1))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", idx + 1))?;
        records.push(record);
    }
    Ok(records)
}
