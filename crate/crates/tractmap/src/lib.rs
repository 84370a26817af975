//! File formats, reports and the command-line front end for
//! [`tractmap_core`].

pub mod cli;
pub mod error;
pub mod io;
pub mod parallel;
pub mod report;

pub use error::{Error, Result};
