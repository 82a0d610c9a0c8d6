//! Experiment driver library behind the `qfi-control` binary.
//!
//! Splitting the machinery out of `main.rs` keeps the sweep and config logic
//! testable; the binary only parses flags and dispatches.

pub mod commands;
pub mod config;
pub mod output;
pub mod sweep;
