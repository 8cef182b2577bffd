//! Experiment harness and text rendering behind the `pttab` binary.

pub mod experiment;
pub mod render;
