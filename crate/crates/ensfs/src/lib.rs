//! File formats, the experiment harness and the command-line interface built
//! on `ensfs-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod io;
pub mod report;

pub use error::{EnsfsError, Result};
