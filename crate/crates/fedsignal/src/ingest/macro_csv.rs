use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use fedsignal_core::types::SeriesError;
use fedsignal_core::MacroSeries;
use serde::{Deserialize, Serialize};

use super::{csv_reader, parse_date, parse_value, read_to_string, IngestError};

const HEADER: &str = "date,value";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frequency {
    #[default]
    Monthly,
    /// Collapsed to the last value of each month.
    Daily,
}

/// Reads a `date,value` file. The series id is the file stem.
pub fn load_macro_csv(path: &Path, frequency: Frequency) -> Result<MacroSeries, IngestError> {
    let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
    parse_macro_csv(&read_to_string(path)?, &id, frequency, path)
}

pub fn parse_macro_csv(text: &str, id: &str, frequency: Frequency, path: &Path) -> Result<MacroSeries, IngestError> {
    let mut rdr = csv_reader(text, path, HEADER)?;
    let mut obs: Vec<(NaiveDate, f64)> = Vec::new();
    for rec in rdr.records() {
        let malformed = |line| IngestError::MalformedRow { path: path.into(), line };
        let rec = rec.map_err(|e| malformed(e.position().map_or(0, |p| p.line())))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 2 {
            return Err(malformed(line));
        }
        let date = parse_date(&rec[0]).ok_or_else(|| malformed(line))?;
        let value = parse_value(&rec[1]).ok_or_else(|| malformed(line))?;
        obs.push((date, value));
    }
    let built = match frequency {
        Frequency::Monthly => MacroSeries::from_monthly(id, obs),
        Frequency::Daily => MacroSeries::from_daily(id, obs),
    };
    built.map_err(|e| match e {
        SeriesError::EmptySeries(_) => IngestError::EmptySeries { path: path.into() },
        SeriesError::DuplicateMonth(date) => IngestError::DuplicateMonth { path: path.into(), date },
        // parse_value already rejects non-finite input
        SeriesError::NonFinite(_) => IngestError::MalformedRow { path: path.into(), line: 0 },
    })
}

/// Writes observations with shortest round-trip float formatting, so
/// reloading gives back the identical series.
pub fn write_macro_csv<W: Write>(series: &MacroSeries, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{HEADER}")?;
    for (d, v) in series.observations() {
        writeln!(w, "{},{}", d.format("%Y-%m-%d"), v)?;
    }
    Ok(())
}

/// Loads `<dir>/<ID>.csv` for every requested id.
pub fn load_macro_dir(dir: &Path, ids: &[String], daily: &[String]) -> Result<Vec<MacroSeries>, IngestError> {
    ids.iter()
        .map(|id| {
            let path: PathBuf = dir.join(format!("{id}.csv"));
            let freq = if daily.contains(id) { Frequency::Daily } else { Frequency::Monthly };
            load_macro_csv(&path, freq)
        })
        .collect()
}
