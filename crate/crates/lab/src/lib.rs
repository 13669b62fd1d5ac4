//! File formats, experiment artifacts and the `sclab` command line on top of
//! `sclab-core`.

pub mod cli;
pub mod codefile;
pub mod config;
pub mod manifest;
pub mod output;
pub mod svg;
