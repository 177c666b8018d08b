//! Test fixtures: reference snippets, generated corpora and brute-force
//! oracles.

pub mod fixture;
pub mod oracles;
pub mod planted;
pub mod samples;
