use std::path::Path;

use chrono::NaiveDate;
use fedsignal_core::types::{chain_decisions, DecisionError};
use fedsignal_core::DecisionRecord;

use super::{csv_reader, parse_date, parse_value, read_to_string, IngestError};

const HEADER: &str = "meeting_date,target_rate";

pub fn load_decisions(path: &Path) -> Result<Vec<DecisionRecord>, IngestError> {
    parse_decisions(&read_to_string(path)?, path)
}

/// Rows must already be in date order; `prev_target_rate` is chained from the
/// previous row and equals the rate itself on the first.
pub fn parse_decisions(text: &str, path: &Path) -> Result<Vec<DecisionRecord>, IngestError> {
    let mut rdr = csv_reader(text, path, HEADER)?;
    let mut rows: Vec<(NaiveDate, f64)> = Vec::new();
    let mut lines = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| IngestError::MalformedRow {
            path: path.into(),
            line: e.position().map_or(0, |p| p.line()),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let malformed = || IngestError::MalformedRow { path: path.into(), line };
        if rec.len() != 2 {
            return Err(malformed());
        }
        rows.push((parse_date(&rec[0]).ok_or_else(malformed)?, parse_value(&rec[1]).ok_or_else(malformed)?));
        lines.push(line);
    }
    chain_decisions(&rows).map_err(|e| {
        let line_of = |d: NaiveDate| rows.iter().position(|r| r.0 == d).map_or(0, |i| lines[i]);
        match e {
            DecisionError::NonMonotonicDates(_) => {
                // first row not after its predecessor
                let i = rows.windows(2).position(|w| w[1].0 <= w[0].0).map_or(0, |i| i + 1);
                IngestError::NonMonotonicDates { path: path.into(), line: lines.get(i).copied().unwrap_or(0) }
            }
            DecisionError::RateOutOfRange { date, rate } => {
                IngestError::RateOutOfRange { path: path.into(), line: line_of(date), rate }
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<DecisionRecord>, IngestError> {
        parse_decisions(text, Path::new("decisions.csv"))
    }

    #[test]
    fn chains_previous_rate() {
        let d = parse("meeting_date,target_rate\n2022-03-16,0.50\n2022-05-04,1.00\n").unwrap();
        assert_eq!(d[1].prev_target_rate, 0.5);
        assert_eq!(d[0].prev_target_rate, 0.5);
    }

    #[test]
    fn single_row_is_its_own_previous() {
        let d = parse("meeting_date,target_rate\n2022-03-16,0.50\n").unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].prev_target_rate, 0.5);
    }

    #[test]
    fn out_of_order() {
        let err = parse("meeting_date,target_rate\n2022-05-04,1.00\n2022-03-16,0.50\n").unwrap_err();
        assert!(matches!(err, IngestError::NonMonotonicDates { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn malformed_and_range() {
        assert!(matches!(parse("meeting_date,target_rate\n2022-03-16,x\n"), Err(IngestError::MalformedRow { line: 2, .. })));
        assert!(matches!(
            parse("meeting_date,target_rate\n2022-03-16,30\n"),
            Err(IngestError::RateOutOfRange { line: 2, .. })
        ));
    }
}
