//! Data loading, configuration, the pipeline subcommands and artifact
//! formats for the `fedsignal` rate-decision forecaster. The numerical work
//! lives in `fedsignal-core`.

pub mod bundle;
pub mod config;
pub mod error;
pub mod exec;
pub mod ingest;
pub mod output;
pub mod pipeline;

pub use config::{Overrides, PipelineConfig};
pub use error::PipelineError;
pub use fedsignal_core as core;
