//! Token n-gram language model with stupid-backoff scoring, perplexity and
//! greedy completion.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::artifact::{self, ArtifactError, ArtifactHeader};
use crate::extract::SnippetKind;
use crate::lexer::{self, SEPARATOR};

/// Stands in for tokens below the frequency cut-off. The lexer never
/// produces it, nor [`SEPARATOR`].
pub const UNK: &str = "<|unk|>";
pub const UNK_ID: u32 = 0;
pub const SEP_ID: u32 = 1;

pub const MODEL_FORMAT: &str = "vcf-ngram";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmConfig {
    pub order: usize,
    pub min_count: u64,
    pub backoff_alpha: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self { order: 4, min_count: 2, backoff_alpha: 0.4 }
    }
}

#[derive(Debug, Error)]
pub enum LmError {
    #[error("order must be at least 1")]
    Order,
    #[error("backoff alpha must be in (0, 1), got {0}")]
    Alpha(f64),
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("evaluation stream is empty")]
    EmptyStream,
    #[error("unsupported model file {format} v{version}")]
    Format { format: String, version: u32 },
    #[error("model file is inconsistent: {0}")]
    Corrupt(String),
    #[error("{0}")]
    Artifact(#[from] ArtifactError),
}

impl LmConfig {
    pub fn validate(&self) -> Result<(), LmError> {
        if self.order == 0 {
            return Err(LmError::Order);
        }
        if !(self.backoff_alpha > 0.0 && self.backoff_alpha < 1.0) {
            return Err(LmError::Alpha(self.backoff_alpha));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountTable {
    pub total: u64,
    pub next: BTreeMap<u32, u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    config: LmConfig,
    vocab: Vec<String>,
    index: HashMap<String, u32>,
    /// Next-token counts for contexts of length 1..order.
    tables: HashMap<Vec<u32>, CountTable>,
    unigram: Vec<u64>,
    unigram_total: u64,
    /// Token ids by descending unigram count, then ascending text; no UNK.
    ranking: Vec<u32>,
}

fn rank_unigrams(vocab: &[String], unigram: &[u64]) -> Vec<u32> {
    let mut r: Vec<u32> = (0..vocab.len() as u32).filter(|&i| i != UNK_ID).collect();
    r.sort_by(|&a, &b| unigram[b as usize].cmp(&unigram[a as usize]).then_with(|| vocab[a as usize].cmp(&vocab[b as usize])));
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EndKeyword,
    Budget,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub tokens: Vec<String>,
    pub stop_reason: StopReason,
    pub detokenized_text: String,
}

/// Joins tokens with spaces, breaking the line after `;`, `begin` and `end`.
pub fn detokenize(tokens: &[String]) -> String {
    let mut out = String::new();
    for t in tokens {
        if !out.is_empty() && !out.ends_with('\n') {
            out.push(' ');
        }
        out.push_str(t);
        if matches!(t.as_str(), ";" | "begin" | "end") {
            out.push('\n');
        }
    }
    out
}

impl NGramModel {
    /// Trains on documents given as token streams; each document is followed
    /// by a separator and starts with a separator as history.
    pub fn train(docs: &[Vec<String>], config: LmConfig) -> Result<Self, LmError> {
        config.validate()?;
        if docs.iter().all(|d| d.is_empty()) {
            return Err(LmError::EmptyCorpus);
        }
        let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
        for t in docs.iter().flatten() {
            *freq.entry(t.as_str()).or_insert(0) += 1;
        }
        let mut vocab = vec![UNK.to_string(), SEPARATOR.to_string()];
        vocab.extend(
            freq.iter()
                .filter(|(t, &c)| c >= config.min_count && **t != UNK && **t != SEPARATOR)
                .map(|(t, _)| t.to_string()),
        );
        let index = vocab.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        let mut model = Self {
            config,
            unigram: vec![0; vocab.len()],
            vocab,
            index,
            tables: HashMap::new(),
            unigram_total: 0,
            ranking: Vec::new(),
        };
        let max_ctx = config.order - 1;
        for doc in docs {
            let stream = model.stream(doc);
            for t in 1..stream.len() {
                let target = stream[t];
                model.unigram[target as usize] += 1;
                model.unigram_total += 1;
                for k in 1..=max_ctx.min(t) {
                    let table = model.tables.entry(stream[t - k..t].to_vec()).or_default();
                    table.total += 1;
                    *table.next.entry(target).or_insert(0) += 1;
                }
            }
        }
        model.ranking = rank_unigrams(&model.vocab, &model.unigram);
        Ok(model)
    }

    pub fn config(&self) -> &LmConfig {
        &self.config
    }

    pub fn order(&self) -> usize {
        self.config.order
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn table(&self, context: &[String]) -> Option<&CountTable> {
        let ids: Vec<u32> = context.iter().map(|t| self.id(t)).collect();
        self.tables.get(&ids)
    }

    pub fn count(&self, context: &[String], next: &str) -> u64 {
        self.table(context).and_then(|t| t.next.get(&self.id(next)).copied()).unwrap_or(0)
    }

    /// `[SEP] + ids(doc) + [SEP]`.
    fn stream(&self, doc: &[String]) -> Vec<u32> {
        let mut s = Vec::with_capacity(doc.len() + 2);
        s.push(SEP_ID);
        s.extend(doc.iter().map(|t| self.id(t)));
        s.push(SEP_ID);
        s
    }

    fn unigram_prob(&self, id: u32) -> f64 {
        (self.unigram[id as usize] + 1) as f64 / (self.unigram_total + self.vocab.len() as u64) as f64
    }

    /// Contexts from the longest stored suffix of `history` down to length 1.
    fn chain<'a>(&'a self, history: &[u32]) -> Vec<&'a CountTable> {
        let max = history.len().min(self.config.order - 1);
        let mut k = max;
        while k > 0 && !self.tables.contains_key(&history[history.len() - k..]) {
            k -= 1;
        }
        (1..=k).rev().filter_map(|j| self.tables.get(&history[history.len() - j..])).collect()
    }

    fn score_ids(&self, history: &[u32], next: u32) -> f64 {
        let mut mult = 1.0;
        for table in self.chain(history) {
            if let Some(&c) = table.next.get(&next) {
                return mult * c as f64 / table.total as f64;
            }
            mult *= self.config.backoff_alpha;
        }
        mult * self.unigram_prob(next)
    }

    /// Natural-log backoff score of `next` after `context`.
    pub fn log_prob(&self, context: &[String], next: &str) -> f64 {
        let ids: Vec<u32> = context.iter().map(|t| self.id(t)).collect();
        self.score_ids(&ids, self.id(next)).ln()
    }

    /// Backoff perplexity over documents, counting each document's closing
    /// separator as a target.
    pub fn perplexity(&self, docs: &[Vec<String>]) -> Result<f64, LmError> {
        let keep = self.config.order - 1;
        let (mut nll, mut n) = (0.0f64, 0usize);
        for doc in docs {
            let stream = self.stream(doc);
            for t in 1..stream.len() {
                let lo = t.saturating_sub(keep);
                nll -= self.score_ids(&stream[lo..t], stream[t]).ln();
                n += 1;
            }
        }
        if n == 0 {
            return Err(LmError::EmptyStream);
        }
        Ok((nll / n as f64).exp())
    }

    fn best_next(&self, history: &[u32]) -> u32 {
        let chain = self.chain(history);
        let mut candidates: BTreeSet<u32> = chain.iter().flat_map(|t| t.next.keys().copied()).collect();
        // Outside the chain every token scores alpha^len * unigram, so the
        // best of them is the most frequent one.
        let unseen = self.ranking.iter().copied().find(|i| !candidates.contains(i));
        candidates.extend(unseen);
        candidates.remove(&UNK_ID);
        let mut best: Option<(f64, u32)> = None;
        for c in candidates {
            let s = self.score_ids(history, c);
            let better = match best {
                None => true,
                Some((bs, bi)) => s > bs || (s == bs && self.vocab[c as usize] < self.vocab[bi as usize]),
            };
            if better {
                best = Some((s, c));
            }
        }
        best.map(|(_, i)| i).unwrap_or(SEP_ID)
    }

    /// Greedy continuation of a snippet definition.
    pub fn complete_greedy(&self, definition: &str, max_tokens: usize) -> CompletionResult {
        let def_tokens = lexer::tokenize(definition);
        let end_kw = def_tokens.first().and_then(|t| SnippetKind::of_definition(t)).map(SnippetKind::end_keyword);
        let mut history: Vec<u32> = std::iter::once(SEP_ID).chain(def_tokens.iter().map(|t| self.id(t))).collect();
        let mut tokens = Vec::new();
        let mut stop = StopReason::Budget;
        while tokens.len() < max_tokens {
            let next = self.best_next(&history);
            if next == SEP_ID {
                stop = StopReason::Eof;
                break;
            }
            let text = self.vocab[next as usize].clone();
            let is_end = end_kw == Some(text.as_str());
            tokens.push(text);
            history.push(next);
            if is_end {
                stop = StopReason::EndKeyword;
                break;
            }
        }
        CompletionResult { detokenized_text: detokenize(&tokens), tokens, stop_reason: stop }
    }

    pub fn save(&self, path: &Path, header: &ArtifactHeader) -> Result<(), LmError> {
        let mut tables: Vec<TableRecord> = self
            .tables
            .iter()
            .map(|(ctx, t)| TableRecord { context: ctx.clone(), next: t.next.iter().map(|(&k, &v)| (k, v)).collect() })
            .collect();
        tables.sort_by(|a, b| a.context.len().cmp(&b.context.len()).then_with(|| a.context.cmp(&b.context)));
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            artifact: header.clone(),
            config: self.config,
            vocab: self.vocab.clone(),
            unigram: self.unigram.clone(),
            tables,
        };
        artifact::write_atomically(path, |w| {
            serde_json::to_writer(&mut *w, &file)?;
            w.write_all(b"\n")
        })?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<(Self, ArtifactHeader), LmError> {
        let file: ModelFile = artifact::read_json(path)?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(LmError::Format { format: file.format, version: file.version });
        }
        file.config.validate()?;
        let v = file.vocab.len();
        if v < 2 || file.vocab[0] != UNK || file.vocab[1] != SEPARATOR || file.unigram.len() != v {
            return Err(LmError::Corrupt("vocabulary".into()));
        }
        let mut tables = HashMap::new();
        for t in file.tables {
            if t.context.is_empty() || t.context.len() >= file.config.order {
                return Err(LmError::Corrupt("context length".into()));
            }
            if t.context.iter().chain(t.next.iter().map(|(k, _)| k)).any(|&i| i as usize >= v) {
                return Err(LmError::Corrupt("token id".into()));
            }
            let next: BTreeMap<u32, u64> = t.next.into_iter().collect();
            tables.insert(t.context, CountTable { total: next.values().sum(), next });
        }
        let index = file.vocab.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        let ranking = rank_unigrams(&file.vocab, &file.unigram);
        let model = Self {
            ranking,
            config: file.config,
            unigram_total: file.unigram.iter().sum(),
            unigram: file.unigram,
            vocab: file.vocab,
            index,
            tables,
        };
        Ok((model, file.artifact))
    }
}

#[derive(Serialize, Deserialize)]
struct TableRecord {
    context: Vec<u32>,
    next: Vec<(u32, u64)>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    artifact: ArtifactHeader,
    config: LmConfig,
    vocab: Vec<String>,
    unigram: Vec<u64>,
    tables: Vec<TableRecord>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn doc(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn cfg(order: usize, min_count: u64) -> LmConfig {
        LmConfig { order, min_count, backoff_alpha: 0.4 }
    }

    #[test]
    fn direct_counts() {
        let m = NGramModel::train(&[doc("a b a b a b")], cfg(2, 1)).unwrap();
        assert_eq!(m.count(&doc("a"), "b"), 3);
        assert_eq!(m.count(&doc("b"), "a"), 2);
        assert_abs_diff_eq!(m.log_prob(&doc("a"), "b"), 0.0, epsilon = 1e-12);
        for t in m.tables.values() {
            assert_eq!(t.total, t.next.values().sum::<u64>());
            assert!(t.next.values().all(|&c| c >= 1));
        }
    }

    #[test]
    fn rare_tokens_become_unk() {
        let m = NGramModel::train(&[doc("a a rare b b")], cfg(2, 2)).unwrap();
        assert_eq!(m.id("rare"), UNK_ID);
        assert_eq!(m.vocab(), &[UNK, SEPARATOR, "a", "b"]);
        assert_eq!(m.count(&doc("a"), UNK), 1);
        assert_eq!(m.log_prob(&doc("a"), "rare"), m.log_prob(&doc("a"), "never-seen"));
    }

    #[test]
    fn training_is_deterministic() {
        let docs = vec![doc("module m ; endmodule"), doc("x y z x y")];
        assert_eq!(NGramModel::train(&docs, cfg(3, 1)).unwrap(), NGramModel::train(&docs, cfg(3, 1)).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(NGramModel::train(&[], cfg(2, 1)), Err(LmError::EmptyCorpus)));
        assert!(matches!(NGramModel::train(&[vec![]], cfg(2, 1)), Err(LmError::EmptyCorpus)));
        assert!(matches!(NGramModel::train(&[doc("a")], cfg(0, 1)), Err(LmError::Order)));
        let bad = LmConfig { backoff_alpha: 1.0, ..cfg(2, 1) };
        assert!(matches!(NGramModel::train(&[doc("a")], bad), Err(LmError::Alpha(_))));
        let m = NGramModel::train(&[doc("a")], cfg(2, 1)).unwrap();
        assert!(matches!(m.perplexity(&[]), Err(LmError::EmptyStream)));
    }

    /// 14 tokens, the unknown token and the separator all occur twice.
    fn uniform_docs() -> Vec<Vec<String>> {
        let base: Vec<String> = (0..14).map(|i| format!("t{i:02}")).collect();
        (0..2)
            .map(|d| {
                let mut v = base.clone();
                v.push(format!("rare{d}"));
                v
            })
            .collect()
    }

    #[test]
    fn uniform_unigram() {
        let m = NGramModel::train(&uniform_docs(), cfg(1, 2)).unwrap();
        assert_eq!(m.vocab().len(), 16);
        for t in m.vocab() {
            assert_abs_diff_eq!(m.log_prob(&[], t).exp(), 1.0 / 16.0, epsilon = 1e-12);
        }
        let stream = vec![doc("t03 t07 t07 t00 zzz"), doc("t13")];
        assert_abs_diff_eq!(m.perplexity(&stream).unwrap(), 16.0, epsilon = 1e-9);
    }

    #[test]
    fn deterministic_transitions_give_perplexity_one() {
        let docs = vec![doc("a b c")];
        let m = NGramModel::train(&docs, cfg(2, 1)).unwrap();
        assert_abs_diff_eq!(m.perplexity(&docs).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn one_backoff_step_by_hand() {
        // Stream <s> a b c <s>. Unigram targets a, b, c, <s> once each;
        // vocabulary {unk, <s>, a, b, c}. "c" never follows "a".
        let m = NGramModel::train(&[doc("a b c")], cfg(2, 1)).unwrap();
        let p_uni_c = (1.0 + 1.0) / (4.0 + 5.0);
        assert_abs_diff_eq!(m.log_prob(&doc("a"), "c"), (0.4f64 * p_uni_c).ln(), epsilon = 1e-12);
        // no stored table for an unseen context: straight to the unigram floor
        assert_abs_diff_eq!(m.log_prob(&doc("q"), "c"), p_uni_c.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(m.log_prob(&[], "c"), p_uni_c.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(m.log_prob(&doc("zz"), "zz"), (1.0f64 / 9.0).ln(), epsilon = 1e-12);
    }

    #[test]
    fn perplexity_by_hand() {
        // Train "a b a" order 2: a->b 1, b->a 1, <s>->a 1, a-><s> 1.
        let m = NGramModel::train(&[doc("a b a")], cfg(2, 1)).unwrap();
        // Eval "a a": <s>->a 1 (p 1), a->a: backoff 0.4*(2+1)/(4+4), a-><s> 1/2.
        let p = [1.0f64, 0.4 * 3.0 / 8.0, 0.5];
        let expected = (-(p.iter().map(|x| x.ln()).sum::<f64>()) / 3.0).exp();
        assert_abs_diff_eq!(m.perplexity(&[doc("a a")]).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn completes_to_end_keyword() {
        let docs = vec![doc("module m ; endmodule"); 3];
        let m = NGramModel::train(&docs, cfg(4, 1)).unwrap();
        let r = m.complete_greedy("module m ;", 50);
        assert_eq!(r.tokens, vec!["endmodule"]);
        assert_eq!(r.stop_reason, StopReason::EndKeyword);
        assert_eq!(r.detokenized_text, "endmodule");
        let r = m.complete_greedy("module m ;", 1);
        assert_eq!(r.tokens.len(), 1);
    }

    #[test]
    fn budget_and_eof() {
        let m = NGramModel::train(&[doc("a b c d e f")], cfg(2, 1)).unwrap();
        let r = m.complete_greedy("a", 2);
        assert_eq!(r.tokens, vec!["b", "c"]);
        assert_eq!(r.stop_reason, StopReason::Budget);
        let r = m.complete_greedy("d", 10);
        assert_eq!(r.tokens, vec!["e", "f"]);
        assert_eq!(r.stop_reason, StopReason::Eof);
    }

    #[test]
    fn ties_pick_smallest_token() {
        let m = NGramModel::train(&[doc("q y"), doc("q x")], cfg(2, 1)).unwrap();
        assert_eq!(m.complete_greedy("q", 1).tokens, vec!["x"]);
    }

    #[test]
    fn unseen_context_falls_back_to_unigram_argmax() {
        let m = NGramModel::train(&[doc("b b b a")], cfg(3, 1)).unwrap();
        assert_eq!(m.complete_greedy("zzz", 1).tokens, vec!["b"]);
    }

    #[test]
    fn detokenize_rule() {
        let t: Vec<String> = doc("always begin a = b ; end endmodule");
        assert_eq!(detokenize(&t), "always begin\na = b ;\nend\nendmodule");
        assert_eq!(detokenize(&[]), "");
    }

    #[test]
    fn save_load_round_trip() {
        let docs = vec![doc("module m ( a ) ; assign a = 1 ; endmodule"), doc("x y x")];
        let m = NGramModel::train(&docs, cfg(3, 1)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("model.vlm");
        let h = ArtifactHeader::new("fp", "train-lm");
        m.save(&p, &h).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        let (back, hb) = NGramModel::load(&p).unwrap();
        assert_eq!(back, m);
        assert_eq!(hb, h);
        back.save(&p, &h).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), bytes);
    }

    fn corpus() -> impl Strategy<Value = Vec<Vec<String>>> {
        prop::collection::vec(prop::collection::vec("[a-e]", 1..15), 1..5)
    }

    proptest! {
        #[test]
        fn unigram_floor_normalizes(docs in corpus(), min_count in 1u64..3) {
            let m = NGramModel::train(&docs, cfg(3, min_count)).unwrap();
            let total: f64 = (0..m.vocab.len() as u32).map(|i| m.unigram_prob(i)).sum();
            prop_assert!((total - 1.0).abs() <= 1e-6);
            let via_log: f64 = m.vocab().iter().map(|t| m.log_prob(&[], t).exp()).sum();
            prop_assert!((via_log - 1.0).abs() <= 1e-6);
        }

        #[test]
        fn scores_are_finite(docs in corpus(), ctx in prop::collection::vec("[a-g]", 0..4), next in "[a-g]") {
            let m = NGramModel::train(&docs, cfg(4, 1)).unwrap();
            let lp = m.log_prob(&ctx, &next);
            prop_assert!(lp.is_finite() && lp <= 0.0);
        }

        #[test]
        fn training_perplexity_is_monotone_in_order(docs in corpus()) {
            let mut prev = f64::INFINITY;
            for order in 1..=5 {
                let m = NGramModel::train(&docs, cfg(order, 1)).unwrap();
                let pp = m.perplexity(&docs).unwrap();
                prop_assert!(pp <= prev * (1.0 + 1e-12), "order {order}: {pp} > {prev}");
                prev = pp;
            }
        }

        #[test]
        fn completion_is_deterministic(docs in corpus(), prefix in prop::collection::vec("[a-e]", 1..4)) {
            let m = NGramModel::train(&docs, cfg(3, 1)).unwrap();
            let p = prefix.join(" ");
            let a = m.complete_greedy(&p, 20);
            prop_assert_eq!(&a, &m.complete_greedy(&p, 20));
            prop_assert!(a.tokens.len() <= 20);
            prop_assert!(!a.tokens.iter().any(|t| t == UNK || t == SEPARATOR));
        }
    }
}
