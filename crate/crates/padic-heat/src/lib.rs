//! Std companion to `padic-heat-core`: a shared kernel cache, JSON/CSV
//! formats, path-parallel simulation, chi-square p-values, the property
//! suites behind the acceptance run, and the command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub use padic_heat_core as core;

pub mod cache;
pub mod checks;
pub mod commands;
pub mod io;
pub mod sim;
pub mod stats;
