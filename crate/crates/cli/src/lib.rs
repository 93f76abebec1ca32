//! Batch driver for `sg-core`: scenario files, presets, output files.

pub mod config;
pub mod initial;
pub mod output;
pub mod presets;
pub mod scenario;
