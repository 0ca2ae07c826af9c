//! Library surface of the experiment runner, shared by the binary and the
//! acceptance test suite.

pub mod config;
pub mod experiments;
pub mod report;
