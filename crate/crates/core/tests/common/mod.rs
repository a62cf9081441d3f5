//! Oracles shared by the integration suites and the acceptance report.
#![allow(dead_code)]

pub mod geometry;
pub mod memory;
pub mod plans;
pub mod scenes;
