//! Library side of the `g2het` command: scenario files, checks, the
//! reproduction registry and report rendering.

#![allow(clippy::needless_range_loop)]

pub mod checks;
pub mod cli;
pub mod expr;
pub mod registry;
pub mod report;
pub mod scenario;
