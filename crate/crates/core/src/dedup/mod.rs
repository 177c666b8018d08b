//! Exact and near-duplicate removal.
//!
//! Near duplicates are pairs of files whose token-set Jaccard similarity is
//! at least a threshold. Files are clustered by connected components over
//! those pairs and one representative per cluster survives. The accelerated
//! mode proposes candidate pairs with MinHash/LSH banding and checks every
//! candidate with the exact Jaccard, so it never reports a false edge.

mod minhash;
mod union_find;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{normalize_newlines, SourceFile};
use crate::lexer::TokenSet;
use crate::scalar::Scalar;

pub use minhash::{lsh_candidate_pairs, minhash, MinHasher, MinHashSignature};
pub use union_find::UnionFind;

fn intersection_size(a: &TokenSet, b: &TokenSet) -> usize {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small.iter().filter(|t| large.contains(*t)).count()
}

/// Exact `|a ∩ b| / |a ∪ b|`; two empty sets are identical (ratio 1).
pub fn jaccard_exact(a: &TokenSet, b: &TokenSet) -> Ratio<usize> {
    if a.is_empty() && b.is_empty() {
        return Ratio::from_integer(1);
    }
    let inter = intersection_size(a, b);
    Ratio::new(inter, a.len() + b.len() - inter)
}

pub fn jaccard<F: Scalar>(a: &TokenSet, b: &TokenSet) -> F {
    let r = jaccard_exact(a, b);
    F::from_count(*r.numer()) / F::from_count(*r.denom())
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DupCluster {
    pub representative_id: String,
    /// Sorted.
    pub member_ids: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DedupOutcome {
    /// Surviving file ids, sorted.
    pub kept: Vec<String>,
    /// Every input file in exactly one cluster; sorted by representative id.
    pub clusters: Vec<DupCluster>,
}

/// What the representative rule looks at for one file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub file_id: String,
    pub repo_id: String,
    pub relative_path: String,
    pub stars: u64,
}

impl Candidate {
    pub fn of(file: &SourceFile, stars: u64) -> Self {
        Self {
            file_id: file.file_id.clone(),
            repo_id: file.repo_id.clone(),
            relative_path: file.relative_path.clone(),
            stars,
        }
    }

    /// Most stars first, then smallest `(repo_id, relative_path)`.
    fn rank(&self) -> (Reverse<u64>, &str, &str, &str) {
        (Reverse(self.stars), &self.repo_id, &self.relative_path, &self.file_id)
    }
}

fn build_outcome(candidates: &[&Candidate], groups: Vec<Vec<usize>>) -> DedupOutcome {
    let mut clusters: Vec<DupCluster> = groups
        .into_iter()
        .map(|g| {
            let rep = g
                .iter()
                .map(|&i| candidates[i])
                .min_by(|a, b| a.rank().cmp(&b.rank()))
                .expect("groups are non-empty");
            let mut member_ids: Vec<String> = g.iter().map(|&i| candidates[i].file_id.clone()).collect();
            member_ids.sort();
            DupCluster { representative_id: rep.file_id.clone(), member_ids }
        })
        .collect();
    clusters.sort();
    let mut kept: Vec<String> = clusters.iter().map(|c| c.representative_id.clone()).collect();
    kept.sort();
    DedupOutcome { kept, clusters }
}

/// Groups files with equal content (after newline normalization).
pub fn exact_dedup(files: &[SourceFile], stars: &BTreeMap<String, u64>) -> DedupOutcome {
    let candidates: Vec<Candidate> = files
        .iter()
        .map(|f| Candidate::of(f, stars.get(&f.repo_id).copied().unwrap_or(0)))
        .collect();
    let mut by_content: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, f) in files.iter().enumerate() {
        by_content.entry(normalize_newlines(&f.content)).or_default().push(i);
    }
    let refs: Vec<&Candidate> = candidates.iter().collect();
    build_outcome(&refs, by_content.into_values().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DedupMode {
    #[default]
    Exact,
    Accelerated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NearDedupConfig {
    pub threshold: f64,
    pub mode: DedupMode,
    pub hash_count: usize,
    pub bands: usize,
    pub rows: usize,
    pub seed: u64,
}

impl Default for NearDedupConfig {
    fn default() -> Self {
        Self { threshold: 0.8, mode: DedupMode::Exact, hash_count: 128, bands: 32, rows: 4, seed: 0 }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DedupError {
    #[error("threshold {0} is outside (0, 1]")]
    Threshold(f64),
    #[error("bands ({bands}) x rows ({rows}) must be positive and at most hash_count ({hash_count})")]
    Banding { bands: usize, rows: usize, hash_count: usize },
}

impl NearDedupConfig {
    pub fn validate(&self) -> Result<(), DedupError> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(DedupError::Threshold(self.threshold));
        }
        if self.bands == 0 || self.rows == 0 || self.bands * self.rows > self.hash_count {
            return Err(DedupError::Banding { bands: self.bands, rows: self.rows, hash_count: self.hash_count });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NearEntry {
    pub candidate: Candidate,
    pub tokens: TokenSet,
}

fn similar(a: &TokenSet, b: &TokenSet, threshold: f64) -> bool {
    jaccard::<f64>(a, b) >= threshold
}

/// Pairs `(i, j)` with `i < j` whose Jaccard clears the threshold.
pub fn similar_pairs(entries: &[NearEntry], cfg: &NearDedupConfig) -> Result<Vec<(usize, usize)>, DedupError> {
    cfg.validate()?;
    let mut pairs: Vec<(usize, usize)> = match cfg.mode {
        DedupMode::Exact => (0..entries.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                ((i + 1)..entries.len())
                    .filter(move |&j| similar(&entries[i].tokens, &entries[j].tokens, cfg.threshold))
                    .map(move |j| (i, j))
            })
            .collect(),
        DedupMode::Accelerated => {
            let hasher = MinHasher::new(cfg.hash_count, cfg.seed);
            let sigs: Vec<MinHashSignature> = entries.par_iter().map(|e| hasher.signature(&e.tokens)).collect();
            let candidates: Vec<(usize, usize)> = lsh_candidate_pairs(&sigs, cfg.bands, cfg.rows).into_iter().collect();
            candidates
                .into_par_iter()
                .filter(|&(i, j)| similar(&entries[i].tokens, &entries[j].tokens, cfg.threshold))
                .collect()
        }
    };
    pairs.sort_unstable();
    Ok(pairs)
}

pub fn near_dedup(entries: &[NearEntry], cfg: &NearDedupConfig) -> Result<DedupOutcome, DedupError> {
    let pairs = similar_pairs(entries, cfg)?;
    let mut uf = UnionFind::new(entries.len());
    for (i, j) in pairs {
        uf.union(i, j);
    }
    let refs: Vec<&Candidate> = entries.iter().map(|e| &e.candidate).collect();
    Ok(build_outcome(&refs, uf.groups()))
}

/// Pairs of file ids in the same cluster.
pub fn clustered_pairs(clusters: &[DupCluster]) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for c in clusters {
        for (i, a) in c.member_ids.iter().enumerate() {
            for b in &c.member_ids[i + 1..] {
                out.insert((a.clone(), b.clone()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(items: &[&str]) -> TokenSet {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn entry(id: &str, stars: u64, tokens: TokenSet) -> NearEntry {
        NearEntry {
            candidate: Candidate { file_id: id.into(), repo_id: format!("repo-{id}"), relative_path: "a.v".into(), stars },
            tokens,
        }
    }

    #[test]
    fn jaccard_examples() {
        assert_eq!(jaccard::<f64>(&set(&["a", "b", "c"]), &set(&["b", "c", "d"])), 0.5);
        assert_eq!(jaccard::<f64>(&set(&["a", "b"]), &set(&["a", "b"])), 1.0);
        assert_eq!(jaccard::<f64>(&set(&["a"]), &set(&["b"])), 0.0);
        assert_eq!(jaccard::<f64>(&set(&[]), &set(&[])), 1.0);
        assert_eq!(jaccard_exact(&set(&["a", "b", "c"]), &set(&["b", "c", "d"])), Ratio::new(1, 2));
        assert_eq!(jaccard::<f32>(&set(&["a", "b", "c"]), &set(&["b", "c", "d"])), 0.5f32);
    }

    /// `n` shared tokens plus `extra` private tokens on each side.
    fn pair_with(shared: usize, extra_a: usize, extra_b: usize) -> (TokenSet, TokenSet) {
        let common: Vec<String> = (0..shared).map(|i| format!("s{i}")).collect();
        let a = common.iter().cloned().chain((0..extra_a).map(|i| format!("a{i}"))).collect();
        let b = common.iter().cloned().chain((0..extra_b).map(|i| format!("b{i}"))).collect();
        (a, b)
    }

    #[test]
    fn two_similar_files_form_one_cluster() {
        // 17 shared, 3 private on one side: 17/20 = 0.85.
        let (a, b) = pair_with(17, 3, 0);
        assert_eq!(jaccard::<f64>(&a, &b), 0.85);
        let out = near_dedup(&[entry("x", 0, a), entry("y", 5, b)], &NearDedupConfig::default()).unwrap();
        assert_eq!(out.kept, ["y"]);
        assert_eq!(out.clusters.len(), 1);
        assert_eq!(out.clusters[0].member_ids, ["x", "y"]);
    }

    #[test]
    fn threshold_is_inclusive() {
        let (a, b) = pair_with(4, 1, 0);
        assert_eq!(jaccard::<f64>(&a, &b), 0.8);
        let out = near_dedup(&[entry("x", 0, a), entry("y", 0, b)], &NearDedupConfig::default()).unwrap();
        assert_eq!(out.kept.len(), 1);
    }

    #[test]
    fn chains_are_transitively_closed() {
        // A and C share nothing beyond the tokens both share with B.
        let shared: Vec<String> = (0..17).map(|i| format!("s{i}")).collect();
        let a: TokenSet = shared.iter().cloned().chain((0..3).map(|i| format!("a{i}"))).collect();
        let b: TokenSet = shared.iter().cloned().collect();
        let c: TokenSet = shared.iter().cloned().chain((0..3).map(|i| format!("c{i}"))).collect();
        assert_eq!(jaccard::<f64>(&a, &b), 0.85);
        assert_eq!(jaccard::<f64>(&b, &c), 0.85);
        assert!(jaccard::<f64>(&a, &c) < 0.8);
        let out = near_dedup(&[entry("a", 0, a), entry("b", 0, b), entry("c", 0, c)], &NearDedupConfig::default()).unwrap();
        assert_eq!(out.clusters.len(), 1);
        assert_eq!(out.clusters[0].member_ids.len(), 3);
    }

    #[test]
    fn representative_prefers_stars_then_location() {
        let t = set(&["x", "y"]);
        let mk = |id: &str, repo: &str, path: &str, stars| NearEntry {
            candidate: Candidate { file_id: id.into(), repo_id: repo.into(), relative_path: path.into(), stars },
            tokens: t.clone(),
        };
        let out = near_dedup(
            &[mk("1", "b", "a.v", 3), mk("2", "a", "z.v", 3), mk("3", "a", "b.v", 3), mk("4", "z", "a.v", 1)],
            &NearDedupConfig::default(),
        )
        .unwrap();
        assert_eq!(out.kept, ["3"]);
    }

    #[test]
    fn exact_dedup_examples() {
        let f = |repo: &str, c: &str| SourceFile::new(repo, "a.v", c.to_string(), c.len() as u64);
        let stars = BTreeMap::from([("r2".to_string(), 9)]);
        let out = exact_dedup(&[f("r1", "wire w;\n"), f("r2", "wire w;\r\n")], &stars);
        assert_eq!(out.kept.len(), 1);
        assert_eq!(out.kept[0], f("r2", "wire w;\r\n").file_id);
        let out = exact_dedup(&[f("r1", "wire w; // a"), f("r2", "wire w; // b")], &stars);
        assert_eq!(out.kept.len(), 2);
        let files: Vec<_> = (0..5).map(|i| f("r", &format!("wire w{i};"))).collect();
        let out = exact_dedup(&files, &stars);
        assert_eq!(out.clusters.len(), 5);
        assert!(out.clusters.iter().all(|c| c.member_ids.len() == 1));
    }

    #[test]
    fn config_errors() {
        let e = |t| near_dedup(&[], &NearDedupConfig { threshold: t, ..Default::default() });
        assert_eq!(e(0.0), Err(DedupError::Threshold(0.0)));
        assert_eq!(e(1.5), Err(DedupError::Threshold(1.5)));
        assert!(e(1.0).is_ok());
        let bad = NearDedupConfig { bands: 40, ..Default::default() };
        assert!(matches!(bad.validate(), Err(DedupError::Banding { .. })));
    }

    fn arb_sets() -> impl Strategy<Value = Vec<TokenSet>> {
        let tok = prop::sample::select(vec!["a", "b", "c", "d", "e", "f", "g", "h"]);
        prop::collection::vec(prop::collection::btree_set(tok.prop_map(String::from), 0..7), 1..12)
    }

    proptest! {
        #[test]
        fn jaccard_properties(sets in arb_sets()) {
            for a in &sets {
                for b in &sets {
                    let j = jaccard::<f64>(a, b);
                    prop_assert!((0.0..=1.0).contains(&j));
                    prop_assert_eq!(j, jaccard::<f64>(b, a));
                }
                prop_assert_eq!(jaccard::<f64>(a, a), 1.0);
            }
        }

        #[test]
        fn near_dedup_is_permutation_invariant_and_idempotent(sets in arb_sets(), seed in any::<u64>()) {
            let entries: Vec<NearEntry> = sets.iter().enumerate().map(|(i, s)| entry(&format!("f{i:02}"), (i % 3) as u64, s.clone())).collect();
            let cfg = NearDedupConfig { threshold: 0.6, ..Default::default() };
            let out = near_dedup(&entries, &cfg).unwrap();
            let mut shuffled = entries.clone();
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut rng);
            prop_assert_eq!(&near_dedup(&shuffled, &cfg).unwrap(), &out);

            let members: usize = out.clusters.iter().map(|c| c.member_ids.len()).sum();
            prop_assert_eq!(members, entries.len());
            prop_assert!(out.clusters.iter().all(|c| c.member_ids.contains(&c.representative_id)));

            let survivors: Vec<NearEntry> = entries.iter().filter(|e| out.kept.contains(&e.candidate.file_id)).cloned().collect();
            prop_assert_eq!(near_dedup(&survivors, &cfg).unwrap().kept, out.kept);
        }
    }

    use rand::SeedableRng;
}
