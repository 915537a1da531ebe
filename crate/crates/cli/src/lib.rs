//! Library side of the `rwrs` command: configuration, records, reports and
//! the command implementations.

pub mod config;
pub mod error;
pub mod manifest;
pub mod records;
pub mod report;
pub mod run;
pub mod svg;
