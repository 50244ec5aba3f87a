//! File formats, synthetic worlds and the command line for certified codec
//! selection. The selection algorithms live in [`codecsel_core`].

#![warn(missing_docs)]

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod output;
pub mod synth;

pub use error::{exit, CliError};
