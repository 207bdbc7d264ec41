//! Configuration, experiments and reporting behind the `morrey-lab` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod experiments;
pub mod inputs;
pub mod report;
