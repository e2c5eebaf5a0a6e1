//! File formats, persistence and the command pipeline around
//! [`htscan_core`].

pub mod config;
pub mod csv_io;
pub mod error;
pub mod persist;
pub mod pipeline;
pub mod svg;

pub use error::{Error, Result, StageError};
pub use htscan_core as core;
