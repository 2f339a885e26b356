use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::InvalidInput(format!("unknown format {other:?}"))),
        }
    }
}

/// A row type with a flat CSV rendering.
pub trait Tabular: Serialize {
    fn header(&self) -> Vec<&'static str>;
    fn record(&self) -> Vec<String>;
}

/// 17 significant digits, enough to round-trip any `f64`.
pub(crate) fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders rows to bytes. Same rows, same bytes.
pub fn render<R: Tabular>(rows: &[R], format: Format) -> Result<Vec<u8>> {
    let first = rows.first().ok_or(Error::NoRows)?;
    match format {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(first.header())?;
            for row in rows {
                writer.write_record(row.record())?;
            }
            writer
                .into_inner()
                .map_err(|e| Error::Io(e.into_error()))
        }
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(rows)?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

/// Writes rows to `path` as CSV or pretty JSON.
pub fn emit<R: Tabular>(rows: &[R], format: Format, path: &Path) -> Result<()> {
    let bytes = render(rows, format)?;
    fs::write(path, bytes)?;
    Ok(())
}
