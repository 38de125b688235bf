//! Domain records shared by every stage of the pipeline.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Direction of a rate decision. The discriminant is the column index used
/// by every probability matrix in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Class {
    Raise = 0,
    Hold = 1,
    Lower = 2,
}

impl Class {
    pub const ALL: [Class; 3] = [Class::Raise, Class::Hold, Class::Lower];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Class::Raise => "Raise",
            Class::Hold => "Hold",
            Class::Lower => "Lower",
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocType {
    Statement,
    Minutes,
    Speech,
    Testimony,
    Presconf,
}

impl DocType {
    pub const ALL: [DocType; 5] =
        [DocType::Statement, DocType::Minutes, DocType::Speech, DocType::Testimony, DocType::Presconf];

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Statement => "statement",
            DocType::Minutes => "minutes",
            DocType::Speech => "speech",
            DocType::Testimony => "testimony",
            DocType::Presconf => "presconf",
        }
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown document type {0:?}")]
pub struct UnknownDocType(pub String);

impl FromStr for DocType {
    type Err = UnknownDocType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DocType::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| UnknownDocType(s.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("series {0} has no observations")]
    EmptySeries(String),
    #[error("series has two observations for month {0}")]
    DuplicateMonth(NaiveDate),
    #[error("series has a non-finite value at {0}")]
    NonFinite(NaiveDate),
}

/// First day of the month containing `date`.
pub fn month_start(date: NaiveDate) -> NaiveDate {
    date.with_day(1).expect("day 1 exists in every month")
}

/// Months since year 0, used for lag arithmetic.
pub fn month_ordinal(date: NaiveDate) -> i64 {
    date.year() as i64 * 12 + date.month0() as i64
}

/// A monthly univariate series. Observation dates are first-of-month and
/// strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroSeries {
    series_id: String,
    observations: Vec<(NaiveDate, f64)>,
}

impl MacroSeries {
    /// Monthly observations: dates are snapped to the first of their month
    /// and a second value for the same month is an error.
    pub fn from_monthly(
        series_id: impl Into<String>,
        mut observations: Vec<(NaiveDate, f64)>,
    ) -> Result<Self, SeriesError> {
        let series_id = series_id.into();
        if observations.is_empty() {
            return Err(SeriesError::EmptySeries(series_id));
        }
        for (d, v) in observations.iter_mut() {
            *d = month_start(*d);
            if !v.is_finite() {
                return Err(SeriesError::NonFinite(*d));
            }
        }
        observations.sort_by_key(|(d, _)| *d);
        for w in observations.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(SeriesError::DuplicateMonth(w[0].0));
            }
        }
        Ok(Self { series_id, observations })
    }

    /// Daily (or any higher-frequency) observations collapsed to the last
    /// value observed in each month.
    pub fn from_daily(
        series_id: impl Into<String>,
        mut observations: Vec<(NaiveDate, f64)>,
    ) -> Result<Self, SeriesError> {
        let series_id = series_id.into();
        if observations.is_empty() {
            return Err(SeriesError::EmptySeries(series_id));
        }
        if let Some((d, _)) = observations.iter().find(|(_, v)| !v.is_finite()) {
            return Err(SeriesError::NonFinite(*d));
        }
        observations.sort_by_key(|(d, _)| *d);
        let mut monthly: Vec<(NaiveDate, f64)> = Vec::new();
        for (d, v) in observations {
            let m = month_start(d);
            match monthly.last_mut() {
                Some(last) if last.0 == m => last.1 = v,
                _ => monthly.push((m, v)),
            }
        }
        Ok(Self { series_id, observations: monthly })
    }

    pub fn id(&self) -> &str {
        &self.series_id
    }

    pub fn observations(&self) -> &[(NaiveDate, f64)] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|(_, v)| *v).collect()
    }

    /// Value for the month containing `date`, if observed.
    pub fn value_in_month(&self, date: NaiveDate) -> Option<f64> {
        let m = month_start(date);
        self.observations
            .binary_search_by_key(&m, |(d, _)| *d)
            .ok()
            .map(|i| self.observations[i].1)
    }

    /// Latest observation whose month lies strictly before the month of `date`.
    pub fn latest_before_month_of(&self, date: NaiveDate) -> Option<(NaiveDate, f64)> {
        let m = month_start(date);
        let idx = self.observations.partition_point(|(d, _)| *d < m);
        idx.checked_sub(1).map(|i| self.observations[i])
    }

    pub(crate) fn from_sorted_unchecked(series_id: String, observations: Vec<(NaiveDate, f64)>) -> Self {
        Self { series_id, observations }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub doc_id: String,
    pub date: NaiveDate,
    pub doc_type: DocType,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub meeting_date: NaiveDate,
    /// Percent.
    pub target_rate: f64,
    /// Percent; equals `target_rate` for the first record of a set.
    pub prev_target_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecisionError {
    #[error("meeting dates are not strictly increasing at {0}")]
    NonMonotonicDates(NaiveDate),
    #[error("target rate {rate} at {date} is outside [0, 25]")]
    RateOutOfRange { date: NaiveDate, rate: f64 },
}

/// Chains `(meeting_date, target_rate)` rows into decision records, filling
/// `prev_target_rate` from the preceding row.
pub fn chain_decisions(rows: &[(NaiveDate, f64)]) -> Result<Vec<DecisionRecord>, DecisionError> {
    let mut out: Vec<DecisionRecord> = Vec::with_capacity(rows.len());
    for &(date, rate) in rows {
        if !(0.0..=25.0).contains(&rate) {
            return Err(DecisionError::RateOutOfRange { date, rate });
        }
        let prev = match out.last() {
            Some(last) if last.meeting_date >= date => return Err(DecisionError::NonMonotonicDates(date)),
            Some(last) => last.target_rate,
            None => rate,
        };
        out.push(DecisionRecord { meeting_date: date, target_rate: rate, prev_target_rate: prev });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinbertProbRecord {
    pub doc_id: String,
    pub p_positive: f64,
    pub p_negative: f64,
    pub p_neutral: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbError {
    #[error("value {0} is not a probability")]
    NotAProbability(f64),
    #[error("probabilities sum to {0}, not 1")]
    SimplexViolation(f64),
}

pub const SIMPLEX_TOLERANCE: f64 = 1e-6;

impl FinbertProbRecord {
    pub fn validate(&self) -> Result<(), ProbError> {
        let ps = [self.p_positive, self.p_negative, self.p_neutral];
        if let Some(&bad) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(ProbError::NotAProbability(bad));
        }
        let sum: f64 = ps.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(ProbError::SimplexViolation(sum));
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.p_positive, self.p_negative, self.p_neutral]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn monthly_series_rejects_duplicate_month() {
        let err = MacroSeries::from_monthly("CPI", alloc::vec![(d(2020, 1, 1), 1.0), (d(2020, 1, 15), 2.0)]);
        assert_eq!(err, Err(SeriesError::DuplicateMonth(d(2020, 1, 1))));
    }

    #[test]
    fn daily_series_collapses_to_month_end_value() {
        let s = MacroSeries::from_daily(
            "T10Y3M",
            alloc::vec![(d(2020, 1, 30), 1.5), (d(2020, 1, 2), 1.0), (d(2020, 2, 3), 2.0)],
        )
        .unwrap();
        assert_eq!(s.observations(), &[(d(2020, 1, 1), 1.5), (d(2020, 2, 1), 2.0)]);
    }

    #[test]
    fn latest_before_excludes_meeting_month() {
        let s = MacroSeries::from_monthly("X", alloc::vec![(d(2020, 1, 1), 1.0), (d(2020, 3, 1), 3.0)]).unwrap();
        assert_eq!(s.latest_before_month_of(d(2020, 3, 18)), Some((d(2020, 1, 1), 1.0)));
        assert_eq!(s.latest_before_month_of(d(2020, 4, 1)), Some((d(2020, 3, 1), 3.0)));
        assert_eq!(s.latest_before_month_of(d(2020, 1, 31)), None);
    }

    #[test]
    fn decisions_chain_previous_rate() {
        let recs = chain_decisions(&[(d(2022, 3, 16), 0.5), (d(2022, 5, 4), 1.0)]).unwrap();
        assert_eq!(recs[0].prev_target_rate, 0.5);
        assert_eq!(recs[1].prev_target_rate, 0.5);
        assert!(matches!(
            chain_decisions(&[(d(2022, 5, 4), 1.0), (d(2022, 3, 16), 0.5)]),
            Err(DecisionError::NonMonotonicDates(_))
        ));
    }

    #[test]
    fn finbert_validation() {
        let rec = |a, b, c| FinbertProbRecord { doc_id: "d1".into(), p_positive: a, p_negative: b, p_neutral: c };
        assert!(rec(0.1, 0.2, 0.7).validate().is_ok());
        assert_eq!(rec(0.5, 0.5, 0.5).validate(), Err(ProbError::SimplexViolation(1.5)));
        assert_eq!(rec(-0.1, 0.4, 0.7).validate(), Err(ProbError::NotAProbability(-0.1)));
    }

    #[test]
    fn doc_type_parses_closed_set() {
        assert_eq!("presconf".parse::<DocType>(), Ok(DocType::Presconf));
        assert!("blogpost".parse::<DocType>().is_err());
    }
}
