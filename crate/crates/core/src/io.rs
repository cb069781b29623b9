//! File formats shared by the harness and the command-line tool.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::graph::ContourTrace;

/// `step,X` for every step of the trace.
pub fn write_contour_csv<W: Write>(trace: &ContourTrace, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["step", "X"])?;
    for (step, x) in trace.contour.iter().enumerate() {
        wtr.serialize((step, x))?;
    }
    wtr.flush()?;
    Ok(())
}

/// `u,v` per edge, loops as `u,u`.
pub fn write_edges_csv<W: Write>(trace: &ContourTrace, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["u", "v"])?;
    for edge in &trace.edges {
        wtr.serialize(edge)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)?)?;
    Ok(())
}

/// Buffered file writer, for the CSV helpers above.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}
