//! Text-overlap metrics for completions and the evaluation report.

mod bleu;
mod chrf;
mod report;
mod rouge;

pub use bleu::{corpus_bleu, BleuScore};
pub use chrf::{chrf, char_ngram_stats, ChrfConfig};
pub use report::{
    evaluate_completions, render_table, EvalPair, MetricConfig, MetricReport, MetricsError, PairScore, Prediction,
    ReportMetadata,
};
pub use rouge::{lcs_len, rouge_l};
