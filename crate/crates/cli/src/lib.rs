//! Library side of the `padguard` command-line tool.

pub mod bundled;
pub mod commands;
pub mod metrics;
pub mod report;
