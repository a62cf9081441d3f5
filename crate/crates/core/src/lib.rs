//! Deterministic desk-cleaning simulator with reflective replanning and a
//! dual-arm benchmark harness.

pub mod coordination;
pub mod geom;
pub mod plan;
pub mod scenegraph;
pub mod world;
pub mod planner;
pub mod harness;
pub mod cli;
