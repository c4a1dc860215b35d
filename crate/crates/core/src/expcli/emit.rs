use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::config::OutputFormat;
use super::ExpError;

/// Serialize rows as CSV (one header row) or as a JSON array of flat objects.
pub fn write_rows<T: Serialize, W: Write>(
    rows: &[T],
    format: OutputFormat,
    out: W,
) -> Result<(), ExpError> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush().map_err(|source| ExpError::Io {
                path: "<csv>".into(),
                source,
            })?;
        }
        OutputFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out).map_err(|source| ExpError::Io {
                path: "<json>".into(),
                source,
            })?;
        }
    }
    Ok(())
}

pub fn emit<T: Serialize>(
    rows: &[T],
    format: OutputFormat,
    destination: &Path,
) -> Result<(), ExpError> {
    let io = |source| ExpError::Io {
        path: destination.to_path_buf(),
        source,
    };
    let mut file = BufWriter::new(File::create(destination).map_err(io)?);
    write_rows(rows, format, &mut file)?;
    file.flush().map_err(io)
}
