use std::collections::BTreeMap;
use std::path::Path;

use fedsignal_core::types::ProbError;
use fedsignal_core::FinbertProbRecord;

use super::{csv_reader, parse_value, read_to_string, IngestError};

const HEADER: &str = "doc_id,p_positive,p_negative,p_neutral";

pub fn load_finbert_probs(path: &Path) -> Result<Vec<FinbertProbRecord>, IngestError> {
    parse_finbert_probs(&read_to_string(path)?, path)
}

pub fn parse_finbert_probs(text: &str, path: &Path) -> Result<Vec<FinbertProbRecord>, IngestError> {
    let mut rdr = csv_reader(text, path, HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| IngestError::MalformedRow {
            path: path.into(),
            line: e.position().map_or(0, |p| p.line()),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let malformed = || IngestError::MalformedRow { path: path.into(), line };
        if rec.len() != 4 || rec[0].is_empty() {
            return Err(malformed());
        }
        let p = |i: usize| parse_value(&rec[i]).ok_or_else(malformed);
        let r = FinbertProbRecord { doc_id: rec[0].to_string(), p_positive: p(1)?, p_negative: p(2)?, p_neutral: p(3)? };
        r.validate().map_err(|e| match e {
            ProbError::NotAProbability(value) => IngestError::NotAProbability { path: path.into(), line, value },
            ProbError::SimplexViolation(sum) => IngestError::SimplexViolation { path: path.into(), line, sum },
        })?;
        out.push(r);
    }
    Ok(out)
}

/// Keyed by doc id; a repeated id is an error.
pub fn finbert_by_doc(records: Vec<FinbertProbRecord>) -> Result<BTreeMap<String, FinbertProbRecord>, IngestError> {
    let mut map = BTreeMap::new();
    for r in records {
        if map.contains_key(&r.doc_id) {
            return Err(IngestError::DuplicateDocId(r.doc_id));
        }
        map.insert(r.doc_id.clone(), r);
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(row: &str) -> Result<Vec<FinbertProbRecord>, IngestError> {
        parse_finbert_probs(&format!("{HEADER}\n{row}\n"), Path::new("finbert.csv"))
    }

    #[test]
    fn accepts_simplex_row() {
        let r = parse("d1,0.1,0.2,0.7").unwrap();
        assert_eq!(r[0].as_array(), [0.1, 0.2, 0.7]);
    }

    #[test]
    fn rejects_sum() {
        match parse("d1,0.5,0.5,0.5").unwrap_err() {
            IngestError::SimplexViolation { line, sum, .. } => {
                assert_eq!(line, 2);
                assert!((sum - 1.5).abs() < 1e-12);
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn rejects_negative() {
        assert!(matches!(parse("d1,-0.1,0.4,0.7"), Err(IngestError::NotAProbability { line: 2, .. })));
    }

    #[test]
    fn duplicate_ids() {
        let recs = parse_finbert_probs(&format!("{HEADER}\nd1,0.1,0.2,0.7\nd1,0.1,0.2,0.7\n"), Path::new("f.csv")).unwrap();
        assert!(matches!(finbert_by_doc(recs), Err(IngestError::DuplicateDocId(_))));
    }
}
