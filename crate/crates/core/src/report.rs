//! CSV and JSON encodings of [`EstimateReport`] rows.
//!
//! Floats are written in shortest round-trip form, so reading an emitted file
//! and writing it again reproduces it byte for byte.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::montecarlo::EstimateReport;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Parse {
                line: 0,
                message: format!("unknown format `{other}` (expected csv or json)"),
            }),
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::from(io),
        kind => Error::Parse {
            line,
            message: format!("{kind:?}"),
        },
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[EstimateReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(COLUMNS).map_err(csv_error)?;
    }
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<EstimateReport>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(csv_error))
        .collect()
}

/// A JSON array of objects, one per row, followed by a newline.
pub fn write_json<W: Write>(mut out: W, rows: &[EstimateReport]) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

pub fn read_json<R: Read>(input: R) -> Result<Vec<EstimateReport>> {
    serde_json::from_reader(input).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn write<W: Write>(out: W, rows: &[EstimateReport], format: Format) -> Result<()> {
    match format {
        Format::Csv => write_csv(out, rows),
        Format::Json => write_json(out, rows),
    }
}

pub const COLUMNS: [&str; 13] = [
    "gadget",
    "level",
    "p_e",
    "trials",
    "accepts",
    "p_hat",
    "ci_low",
    "ci_high",
    "cond_err",
    "cond_err_lo",
    "cond_err_hi",
    "frame_rate",
    "seed",
];
