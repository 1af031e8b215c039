//! Experiment configuration, corpus generation, equivalence-ratio runs and
//! the invariant-check suite behind the `opharm` binary.

pub mod checks;
pub mod config;
pub mod corpus;
pub mod experiment;
pub mod report;
