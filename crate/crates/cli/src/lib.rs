//! Library surface of the command-line runner: flat configuration
//! files, output record serialization, and run manifests. The binary
//! in `main.rs` wires these onto the pipeline; tests use the readers
//! here to check that every output round-trips.

pub mod config_file;
pub mod manifest;
pub mod records;
