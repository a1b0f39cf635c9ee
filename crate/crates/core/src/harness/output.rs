//! CSV and JSON writers. Output bytes depend only on the data.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::TrajectoryRecord;
use crate::error::Result;

pub const TRAJECTORY_HEADER: &str = "n,t,k,x,v,e,edot,d1,d2,in_window";

/// Long-format trajectory CSV. Leader rows leave `e` and `edot` empty.
pub fn write_trajectory_csv<W: Write>(records: &[TrajectoryRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn trajectory_csv_bytes(records: &[TrajectoryRecord]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_trajectory_csv(records, &mut buf)?;
    Ok(buf)
}

/// Serializes any row type to CSV, header from the field names.
pub fn csv_bytes<R: Serialize>(rows: &[R]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// Pretty JSON with a trailing newline.
pub fn json_bytes<V: Serialize + ?Sized>(value: &V) -> Result<Vec<u8>> {
    let mut buf = serde_json::to_vec_pretty(value)?;
    buf.push(b'\n');
    Ok(buf)
}

/// Writes `bytes` to `path`, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}
