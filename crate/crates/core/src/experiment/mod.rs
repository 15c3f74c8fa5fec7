//! Config files, scenario generators, sweeps and result files.

pub mod config;
pub mod graphs;
pub mod output;
pub mod scenario;
pub mod sweep;
