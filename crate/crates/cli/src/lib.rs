//! IO companion to `fitfem-core`: file formats and the `fitfem` command
//! line tool.

pub mod cli;
pub mod export;

pub use cli::run_cli;
