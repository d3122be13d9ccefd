//! Configuration, task dispatch and file output behind the `metastab` binary.

pub mod config;
pub mod output;
pub mod presets;
pub mod tasks;
