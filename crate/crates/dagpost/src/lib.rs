//! File formats, CSV ingestion, parallel pipelines, validation experiments
//! and the command-line front end for [`dagpost_core`].

pub mod cli;
pub mod csv_io;
pub mod error;
pub mod formats;
pub mod harness;
pub mod pipeline;

pub use error::CliError;
