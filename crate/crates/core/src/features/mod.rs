//! Macro transforms, labels, document alignment and per-meeting feature
//! assembly.

mod assemble;
mod transform;

use alloc::string::String;
use alloc::vec::Vec;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use assemble::{
    align_documents_to_meetings, assemble_feature_matrix, assemble_meetings, eligible_meetings, AssemblyConfig,
    AssemblyInputs, DocAggregation, MacroConfig, MeetingSpec, Method, NO_DOCS,
};
pub use transform::{
    diff_transform, inertia_diff, label_decision, label_decisions, standardize, taylor_rate, DiffKind, Standardizer,
    LABEL_EPSILON,
};

use crate::matrix::Matrix;
use crate::types::Class;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("series {0} has no observations left after differencing")]
    TooShort(String),
    #[error("training mask selects {0} rows; at least 2 are needed")]
    DegenerateTrainSplit(usize),
    #[error("{method} needs the {block} block, which was not supplied")]
    MissingModality { method: Method, block: String },
    #[error("no meetings with complete data in the requested range")]
    NoMeetingsInRange,
    #[error(transparent)]
    Text(#[from] crate::text::TextError),
}

/// Which modality blocks a matrix carries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Modalities {
    #[serde(rename = "macro")]
    pub macro_block: bool,
    pub text: bool,
    pub finbert: bool,
}

/// One meeting's labelled feature row.
#[derive(Debug, Clone, PartialEq)]
pub struct MeetingFrame<'a> {
    pub meeting_date: NaiveDate,
    pub label: Option<Class>,
    pub features: &'a [f64],
    pub feature_names: &'a [String],
    pub sources: Modalities,
}

/// Meetings by features, with the shared name registry and labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub meeting_dates: Vec<NaiveDate>,
    pub feature_names: Vec<String>,
    pub x: Matrix,
    /// `None` only for query rows assembled for prediction.
    pub labels: Vec<Option<Class>>,
    pub sources: Modalities,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.x.rows()
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    pub fn frame(&self, i: usize) -> MeetingFrame<'_> {
        MeetingFrame {
            meeting_date: self.meeting_dates[i],
            label: self.labels[i],
            features: self.x.row(i),
            feature_names: &self.feature_names,
            sources: self.sources,
        }
    }

    /// Class indices of every row. Panics on an unlabelled row.
    pub fn label_indices(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.expect("unlabelled row").index()).collect()
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        Self {
            meeting_dates: indices.iter().map(|&i| self.meeting_dates[i]).collect(),
            feature_names: self.feature_names.clone(),
            x: self.x.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            sources: self.sources,
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }
}
