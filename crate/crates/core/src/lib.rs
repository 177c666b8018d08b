//! Verilog corpus curation and autocompletion evaluation.
//!
//! Stages: [`ingest`] collects permissively licensed sources, [`filters`]
//! drops autogenerated, GPL-noticed and oversized files, [`dedup`] removes
//! exact and near duplicates, [`extract`] pulls module and function
//! snippets, [`dataset`] assigns splits and exports training subsets, [`lm`]
//! trains an n-gram baseline and [`metrics`] scores its completions.

pub mod artifact;
pub mod audit;
pub mod dataset;
pub mod dedup;
pub mod extract;
pub mod filters;
pub mod ingest;
pub mod lexer;
pub mod lm;
pub mod metrics;
pub mod scalar;

pub use scalar::Scalar;

/// Corpus BLEU in double precision.
pub type BleuScore = metrics::BleuScore<f64>;

pub fn bleu(pairs: &[(Vec<String>, Vec<String>)], max_n: usize) -> BleuScore {
    metrics::corpus_bleu(pairs, max_n)
}

pub fn rouge_l(hyp: &[String], reference: &[String]) -> f64 {
    metrics::rouge_l(hyp, reference)
}

pub fn chrf(hyp: &str, reference: &str, cfg: &metrics::ChrfConfig) -> f64 {
    metrics::chrf(hyp, reference, cfg)
}

pub fn jaccard(a: &lexer::TokenSet, b: &lexer::TokenSet) -> f64 {
    dedup::jaccard(a, b)
}
