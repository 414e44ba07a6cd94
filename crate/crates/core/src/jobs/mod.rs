//! Batch jobs: configs, pipelines and reports.

pub mod config;
pub mod pipeline;
pub mod report;
pub mod selfcheck;

pub use config::{Command, Format, JobConfig, Tolerances};
pub use pipeline::{run, Pipeline, PipelineRegistry};
pub use report::{Check, Report};
