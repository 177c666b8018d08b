use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{chrf, corpus_bleu, rouge_l, ChrfConfig};
use crate::lexer;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub snippet_id: String,
    pub completion: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalPair {
    pub snippet_id: String,
    pub hypothesis: String,
    pub reference: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub max_n: usize,
    pub chrf_n_max: usize,
    pub beta: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self { max_n: 4, chrf_n_max: 6, beta: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub tokenization: String,
    pub bleu_aggregation: String,
    pub rouge_l_aggregation: String,
    pub chrf_aggregation: String,
    pub bleu_smoothing: String,
    pub chrf_whitespace: String,
    pub max_n: usize,
    pub chrf_n_max: usize,
    pub beta: f64,
}

impl ReportMetadata {
    fn of(cfg: &MetricConfig) -> Self {
        Self {
            tokenization: "verilog-lexer".into(),
            bleu_aggregation: "corpus".into(),
            rouge_l_aggregation: "mean-over-pairs".into(),
            chrf_aggregation: "mean-over-pairs".into(),
            bleu_smoothing: "add-one on orders with zero corpus matches".into(),
            chrf_whitespace: "removed".into(),
            max_n: cfg.max_n,
            chrf_n_max: cfg.chrf_n_max,
            beta: cfg.beta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub snippet_id: String,
    pub rouge_l: f64,
    pub chrf: f64,
    /// No prediction was given; scored as an empty hypothesis.
    pub missing_prediction: bool,
    pub hypothesis: String,
    pub reference: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub model_id: String,
    pub subset: String,
    pub perplexity: Option<f64>,
    pub bleu: f64,
    pub bleu_unsmoothed: f64,
    pub bleu_smoothed: bool,
    pub rouge_l: f64,
    pub chrf: f64,
    pub pair_count: usize,
    pub missing_predictions: usize,
    pub metadata: ReportMetadata,
    /// Sorted by snippet_id.
    pub pairs: Vec<PairScore>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("predictions refer to unknown snippets: {}", .0.join(", "))]
    UnknownSnippets(Vec<String>),
    #[error("snippets predicted more than once: {}", .0.join(", "))]
    DuplicatePredictions(Vec<String>),
    #[error("no reference snippets to evaluate")]
    NoPairs,
}

/// Pairs every reference with its prediction; references with no prediction
/// get an empty hypothesis.
pub fn assemble_pairs(
    predictions: &[Prediction],
    references: &BTreeMap<String, String>,
) -> Result<(Vec<EvalPair>, usize), MetricsError> {
    let unknown: BTreeSet<String> =
        predictions.iter().filter(|p| !references.contains_key(&p.snippet_id)).map(|p| p.snippet_id.clone()).collect();
    if !unknown.is_empty() {
        return Err(MetricsError::UnknownSnippets(unknown.into_iter().collect()));
    }
    let mut by_id: BTreeMap<&str, &str> = BTreeMap::new();
    let mut dups = BTreeSet::new();
    for p in predictions {
        if by_id.insert(p.snippet_id.as_str(), p.completion.as_str()).is_some() {
            dups.insert(p.snippet_id.clone());
        }
    }
    if !dups.is_empty() {
        return Err(MetricsError::DuplicatePredictions(dups.into_iter().collect()));
    }
    let mut missing = 0;
    let pairs = references
        .iter()
        .map(|(id, reference)| {
            let hypothesis = by_id.get(id.as_str()).map(|s| s.to_string()).unwrap_or_else(|| {
                missing += 1;
                String::new()
            });
            EvalPair { snippet_id: id.clone(), hypothesis, reference: reference.clone() }
        })
        .collect();
    Ok((pairs, missing))
}

/// Scores predictions against reference bodies keyed by snippet_id.
pub fn evaluate_completions(
    model_id: &str,
    subset: &str,
    predictions: &[Prediction],
    references: &BTreeMap<String, String>,
    perplexity: Option<f64>,
    cfg: &MetricConfig,
) -> Result<MetricReport, MetricsError> {
    let (pairs, missing) = assemble_pairs(predictions, references)?;
    if pairs.is_empty() {
        return Err(MetricsError::NoPairs);
    }
    let provided: BTreeSet<&str> = predictions.iter().map(|p| p.snippet_id.as_str()).collect();
    let chrf_cfg = ChrfConfig { n_max: cfg.chrf_n_max, beta: cfg.beta };
    let scored: Vec<(PairScore, (Vec<String>, Vec<String>))> = pairs
        .par_iter()
        .map(|p| {
            let h = lexer::tokenize(&p.hypothesis);
            let r = lexer::tokenize(&p.reference);
            let score = PairScore {
                snippet_id: p.snippet_id.clone(),
                rouge_l: rouge_l(&h, &r),
                chrf: chrf(&p.hypothesis, &p.reference, &chrf_cfg),
                missing_prediction: !provided.contains(p.snippet_id.as_str()),
                hypothesis: p.hypothesis.clone(),
                reference: p.reference.clone(),
            };
            (score, (h, r))
        })
        .collect();
    let (rows, token_pairs): (Vec<PairScore>, Vec<_>) = scored.into_iter().unzip();
    let bleu = corpus_bleu::<f64, String>(&token_pairs, cfg.max_n);
    let n = rows.len() as f64;
    Ok(MetricReport {
        model_id: model_id.to_string(),
        subset: subset.to_string(),
        perplexity,
        bleu: bleu.bleu,
        bleu_unsmoothed: bleu.unsmoothed,
        bleu_smoothed: bleu.smoothed,
        rouge_l: rows.iter().map(|r| r.rouge_l).sum::<f64>() / n,
        chrf: rows.iter().map(|r| r.chrf).sum::<f64>() / n,
        pair_count: rows.len(),
        missing_predictions: missing,
        metadata: ReportMetadata::of(cfg),
        pairs: rows,
    })
}

/// Aligned plain-text results table, one row per report.
pub fn render_table(reports: &[MetricReport]) -> String {
    let header = ["Model", "Training Data", "Perplexity", "BLEU", "ROUGE-L", "chrF"];
    let rows: Vec<[String; 6]> = reports
        .iter()
        .map(|r| {
            [
                r.model_id.clone(),
                r.subset.clone(),
                r.perplexity.map(|p| format!("{p:.2}")).unwrap_or_else(|| "-".into()),
                format!("{:.4}", r.bleu),
                format!("{:.4}", r.rouge_l),
                format!("{:.2}", r.chrf),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for r in &rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: [&str; 6]| {
        let mut s = String::new();
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                s.push_str(" | ");
            }
            if i < 2 {
                s.push_str(&format!("{c:<w$}", w = widths[i]));
            } else {
                s.push_str(&format!("{c:>w$}", w = widths[i]));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header);
    out.push_str(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-|-"));
    out.push('\n');
    for r in &rows {
        out.push_str(&line([&r[0], &r[1], &r[2], &r[3], &r[4], &r[5]]));
    }
    out
}
