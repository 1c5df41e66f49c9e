//! Operator-facing pieces: dataset synthesis with the corruption model,
//! plaintext linkage for quality evaluation, the report generator and the
//! benchmark harness. The `pprl` binary wires these to the command line.

pub mod bench;
pub mod config;
pub mod eval;
pub mod records;
pub mod synth;
