//! Files, formats and the command line around [`alphagate_core`].

pub mod casebook;
pub mod cli;
pub mod parallel;
pub mod plan;
pub mod report;

pub use alphagate_core as core;
