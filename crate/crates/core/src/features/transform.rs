use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureMatrix};
use crate::math;
use crate::matrix::Matrix;
use crate::types::{month_ordinal, Class, DecisionRecord, MacroSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffKind {
    /// Change over the previous month.
    Prev,
    /// Change over the same month a year earlier.
    Year,
}

impl DiffKind {
    fn lag(self) -> i64 {
        match self {
            DiffKind::Prev => 1,
            DiffKind::Year => 12,
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            DiffKind::Prev => "diff_prev",
            DiffKind::Year => "diff_year",
        }
    }
}

/// `v_t - v_{t-lag}`, keeping only months whose lagged month was observed.
/// The result is named `<id>_diff_prev` or `<id>_diff_year`.
pub fn diff_transform(series: &MacroSeries, kind: DiffKind) -> Result<MacroSeries, FeatureError> {
    let obs = series.observations();
    let lag = kind.lag();
    let mut out = Vec::new();
    for (i, &(date, value)) in obs.iter().enumerate() {
        let target = month_ordinal(date) - lag;
        // observations are sorted and monthly, so the lag is at most `lag` slots back
        let lo = i.saturating_sub(lag as usize);
        if let Some(&(_, prev)) = obs[lo..i].iter().find(|(d, _)| month_ordinal(*d) == target) {
            out.push((date, value - prev));
        }
    }
    let id = format!("{}_{}", series.id(), kind.suffix());
    if out.is_empty() {
        return Err(FeatureError::TooShort(id));
    }
    Ok(MacroSeries::from_sorted_unchecked(id, out))
}

/// Year-over-year percent change of an index-level series, named `<id>_yoy_pct`.
pub(crate) fn yoy_percent(series: &MacroSeries) -> Option<MacroSeries> {
    let obs = series.observations();
    let mut out = Vec::new();
    for (i, &(date, value)) in obs.iter().enumerate() {
        let target = month_ordinal(date) - 12;
        let lo = i.saturating_sub(12);
        if let Some(&(_, prev)) = obs[lo..i].iter().find(|(d, _)| month_ordinal(*d) == target) {
            if prev != 0.0 {
                out.push((date, 100.0 * (value / prev - 1.0)));
            }
        }
    }
    (!out.is_empty()).then(|| MacroSeries::from_sorted_unchecked(format!("{}_yoy_pct", series.id()), out))
}

/// Per-feature mean and population standard deviation of the training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Standard deviations below this are treated as constant columns.
const MIN_STD: f64 = 1e-12;

impl Standardizer {
    pub fn fit(x: &Matrix, train_rows: &[usize]) -> Result<Self, FeatureError> {
        if train_rows.len() < 2 {
            return Err(FeatureError::DegenerateTrainSplit(train_rows.len()));
        }
        let n = train_rows.len() as f64;
        let d = x.cols();
        let mut means = alloc::vec![0.0; d];
        for &i in train_rows {
            for (m, v) in means.iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut stds = alloc::vec![0.0; d];
        for &i in train_rows {
            for ((s, v), m) in stds.iter_mut().zip(x.row(i)).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        stds.iter_mut().for_each(|s| *s = math::sqrt(*s / n));
        Ok(Self { means, stds })
    }

    pub fn apply_row(&self, row: &mut [f64]) {
        for ((v, m), s) in row.iter_mut().zip(&self.means).zip(&self.stds) {
            *v = if *s < MIN_STD { 0.0 } else { (*v - m) / s };
        }
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..out.rows() {
            self.apply_row(out.row_mut(i));
        }
        out
    }
}

/// z-scores every column with statistics of the masked training rows.
pub fn standardize(matrix: &FeatureMatrix, train_row_mask: &[bool]) -> Result<(FeatureMatrix, Standardizer), FeatureError> {
    let train: Vec<usize> = train_row_mask.iter().enumerate().filter_map(|(i, &m)| m.then_some(i)).collect();
    let s = Standardizer::fit(&matrix.x, &train)?;
    let mut out = matrix.clone();
    out.x = s.apply(&matrix.x);
    Ok((out, s))
}

/// `inflation + r* + 0.5 (inflation - target) + 0.5 gap`, all in percent.
pub fn taylor_rate(inflation_yoy: f64, output_gap: f64, neutral_real_rate: f64, inflation_target: f64) -> f64 {
    inflation_yoy + neutral_real_rate + 0.5 * (inflation_yoy - inflation_target) + 0.5 * output_gap
}

/// Rule-implied rate minus the status-quo rate.
pub fn inertia_diff(taylor: f64, prev_target_rate: f64) -> f64 {
    taylor - prev_target_rate
}

pub const LABEL_EPSILON: f64 = 1e-9;

pub fn label_decision(record: &DecisionRecord, epsilon: f64) -> Class {
    let change = record.target_rate - record.prev_target_rate;
    if change > epsilon {
        Class::Raise
    } else if change < -epsilon {
        Class::Lower
    } else {
        Class::Hold
    }
}

pub fn label_decisions(decisions: &[DecisionRecord], epsilon: f64) -> Vec<Class> {
    decisions.iter().map(|d| label_decision(d, epsilon)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use chrono::NaiveDate;

    fn monthly(values: &[f64]) -> MacroSeries {
        let obs = values
            .iter()
            .enumerate()
            .map(|(i, &v)| (NaiveDate::from_ymd_opt(2020 + (i / 12) as i32, 1 + (i % 12) as u32, 1).unwrap(), v))
            .collect();
        MacroSeries::from_monthly("X", obs).unwrap()
    }

    #[test]
    fn diff_prev() {
        let d = diff_transform(&monthly(&[1.0, 1.5, 2.5]), DiffKind::Prev).unwrap();
        assert_eq!(d.values(), vec![0.5, 1.0]);
        assert_eq!(d.id(), "X_diff_prev");
    }

    #[test]
    fn diff_year_needs_thirteen_months() {
        assert_eq!(
            diff_transform(&monthly(&[3.0; 12]), DiffKind::Year),
            Err(FeatureError::TooShort("X_diff_year".into()))
        );
        let rising: Vec<f64> = (0..13).map(|i| 1.0 + 0.1 * i as f64).collect();
        let d = diff_transform(&monthly(&rising), DiffKind::Year).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d.values()[0] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn diff_skips_gaps() {
        let d = |m| NaiveDate::from_ymd_opt(2020, m, 1).unwrap();
        let s = MacroSeries::from_monthly("G", vec![(d(1), 1.0), (d(2), 2.0), (d(4), 5.0), (d(5), 7.0)]).unwrap();
        let out = diff_transform(&s, DiffKind::Prev).unwrap();
        assert_eq!(out.observations(), &[(d(2), 1.0), (d(5), 2.0)]);
    }

    #[test]
    fn standardize_uses_train_statistics() {
        let x = Matrix::from_rows(&[[1.0, 5.0], [3.0, 5.0], [4.0, 7.0]]);
        let s = Standardizer::fit(&x, &[0, 1]).unwrap();
        assert_eq!(s.means, vec![2.0, 5.0]);
        assert_eq!(s.stds, vec![1.0, 0.0]);
        let z = s.apply(&x);
        assert_eq!(z.row(0), &[-1.0, 0.0]);
        assert_eq!(z.row(1), &[1.0, 0.0]);
        assert_eq!(z.row(2), &[2.0, 0.0]);
        assert_eq!(Standardizer::fit(&x, &[0]), Err(FeatureError::DegenerateTrainSplit(1)));
    }

    #[test]
    fn taylor_examples() {
        assert_eq!(taylor_rate(2.0, 0.0, 2.0, 2.0), 4.0);
        assert_eq!(taylor_rate(4.0, 2.0, 2.0, 2.0), 8.0);
        assert_eq!(taylor_rate(0.0, -2.0, 2.0, 2.0), 0.0);
    }

    #[test]
    fn inertia_examples() {
        assert_eq!(inertia_diff(4.0, 1.0), 3.0);
        assert_eq!(inertia_diff(2.0, 2.0), 0.0);
        assert_eq!(inertia_diff(1.0, 5.0), -4.0);
    }

    #[test]
    fn labels_from_rate_changes() {
        let date = NaiveDate::from_ymd_opt(2022, 3, 16).unwrap();
        let rec = |prev, now| DecisionRecord { meeting_date: date, target_rate: now, prev_target_rate: prev };
        assert_eq!(label_decision(&rec(0.5, 1.0), LABEL_EPSILON), Class::Raise);
        assert_eq!(label_decision(&rec(1.0, 1.0), LABEL_EPSILON), Class::Hold);
        assert_eq!(label_decision(&rec(5.25, 4.75), LABEL_EPSILON), Class::Lower);
    }

    #[test]
    fn yoy_percent_of_index() {
        let mut v = vec![100.0; 12];
        v.push(103.0);
        let y = yoy_percent(&monthly(&v)).unwrap();
        assert!((y.values()[0] - 3.0).abs() < 1e-12);
    }
}
