//! Command-line front end for `keenjump-core`: configuration files, CSV
//! output, multi-threaded Monte Carlo sweeps and the validation table.

pub mod cli;
pub mod output;
pub mod parallel;
pub mod validation;
