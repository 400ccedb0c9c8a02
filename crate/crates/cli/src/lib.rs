//! IO companion to `frontis-core`: world and config file formats, suite
//! manifests, result and event logs, the remote VLM scorer, log auditing,
//! and SVG plotting. The `frontis` binary wires these into subcommands.

pub mod audit;
pub mod formats;
pub mod plot;
pub mod suite;
pub mod vlm;
