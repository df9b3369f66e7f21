use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};
use crate::run::{ResultTable, RunOutput};

/// 17 significant digits, enough to round-trip any `f64`; `-0` prints as `0`.
pub fn format_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

pub fn csv_bytes(t: &ResultTable) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(t.columns.iter().map(|c| c.header()))
        .expect("in-memory write");
    for row in &t.rows {
        w.write_record(row.iter().map(|x| format_float(*x)))
            .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Sibling `<stem>.meta.json` of a CSV path.
pub fn metadata_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

/// Sibling `<stem>.xyz` of a CSV path.
pub fn xyz_path(csv: &Path) -> PathBuf {
    csv.with_extension("xyz")
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Writes the CSV and its metadata file.
pub fn emit_csv(t: &ResultTable, path: &Path) -> Result<()> {
    write(path, &csv_bytes(t))?;
    let mut meta = serde_json::to_string_pretty(&t.metadata).expect("metadata serializes");
    meta.push('\n');
    write(&metadata_path(path), meta.as_bytes())
}

/// Writes every artifact of a run; returns the paths written.
pub fn write_outputs(out: &RunOutput, path: &Path) -> Result<Vec<PathBuf>> {
    emit_csv(&out.table, path)?;
    let mut written = vec![path.to_path_buf(), metadata_path(path)];
    if let Some(xyz) = &out.xyz {
        write(&xyz_path(path), xyz.as_bytes())?;
        written.push(xyz_path(path));
    }
    Ok(written)
}
