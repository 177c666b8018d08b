//! Split assignment, parsability tagging, training subsets, statistics and
//! export.

mod export;
mod parse;

pub use export::{
    build_records, chunk_units, read_chunks, read_csv, sanitize_chunk_token, write_chunks, write_csv, ChunkMeta,
    ChunkSet, ExportRecord, UnitSource, CHUNK_SIZE,
};
pub use parse::{
    balanced, internal_check, tag_parsable, CommandRunner, ParseCache, ParseReport, ParserCommand, SystemRunner,
    INTERNAL_CHECKER,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub file_id: String,
    pub repo_id: String,
    pub stars: u64,
    pub split: Split,
    pub eligible: bool,
    pub parsable: bool,
    pub snippet_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnippetRecord {
    pub snippet_id: String,
    pub file_id: String,
    pub split: Split,
    pub parsable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub corpus_id: String,
    pub seed: u64,
    pub val_frac: f64,
    pub test_frac: f64,
    pub split_by_repo: bool,
    pub config_fingerprint: String,
    /// Which parsability checker produced the `parsable` flags, if any ran.
    pub parsability_checker: Option<String>,
    /// Sorted by file_id.
    pub files: Vec<FileRecord>,
    /// Sorted by snippet_id.
    pub snippets: Vec<SnippetRecord>,
}

impl DatasetManifest {
    pub fn file(&self, file_id: &str) -> Option<&FileRecord> {
        self.files.binary_search_by(|f| f.file_id.as_str().cmp(file_id)).ok().map(|i| &self.files[i])
    }

    /// Sets per-file parsability and propagates it to the file's snippets.
    pub fn set_parsable(&mut self, flags: &BTreeMap<String, bool>, checker: &str) {
        for f in &mut self.files {
            f.parsable = flags.get(&f.file_id).copied().unwrap_or(false);
        }
        let by_file: BTreeMap<&str, bool> = self.files.iter().map(|f| (f.file_id.as_str(), f.parsable)).collect();
        for s in &mut self.snippets {
            s.parsable = by_file.get(s.file_id.as_str()).copied().unwrap_or(false);
        }
        self.parsability_checker = Some(checker.to_string());
    }

    /// Checks the structural invariants, returning a description of the first
    /// violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen = BTreeSet::new();
        for f in &self.files {
            if !seen.insert(f.file_id.as_str()) {
                return Err(format!("file {} listed twice", f.file_id));
            }
            if !f.eligible && f.split != Split::Train {
                return Err(format!("ineligible file {} in {}", f.file_id, f.split));
            }
            if f.eligible != (f.stars >= 1 && f.snippet_count >= 1) {
                return Err(format!("file {} has a wrong eligibility flag", f.file_id));
            }
        }
        for s in &self.snippets {
            let f = self.file(&s.file_id).ok_or_else(|| format!("snippet {} has no file", s.snippet_id))?;
            if f.split != s.split || f.parsable != s.parsable {
                return Err(format!("snippet {} disagrees with file {}", s.snippet_id, f.file_id));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("split fractions must be non-negative with val + test <= 1 (got {val}, {test})")]
    Fractions { val: f64, test: f64 },
    #[error("snippet {snippet_id} refers to unknown file {file_id}")]
    UnknownFile { snippet_id: String, file_id: String },
    #[error("no parser command is available and the internal fallback is disabled")]
    NoParser,
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Artifact(#[from] crate::artifact::ArtifactError),
    #[error("unit {0} is not in the export source")]
    MissingUnit(String),
}

/// Split-assignment input for one file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitInput {
    pub file_id: String,
    pub repo_id: String,
    pub stars: u64,
    pub snippet_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitConfig {
    pub seed: u64,
    pub val_frac: f64,
    pub test_frac: f64,
    pub split_by_repo: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self { seed: 0, val_frac: 0.15, test_frac: 0.35, split_by_repo: false }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<(), DatasetError> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !ok(self.val_frac) || !ok(self.test_frac) || self.val_frac + self.test_frac > 1.0 + 1e-12 {
            return Err(DatasetError::Fractions { val: self.val_frac, test: self.test_frac });
        }
        Ok(())
    }
}

pub fn is_eligible(stars: u64, snippet_count: usize) -> bool {
    stars >= 1 && snippet_count >= 1
}

/// `floor(frac * n)`, tolerant of the float error in products like `0.15 * 10000`.
pub fn split_count(frac: f64, n: usize) -> usize {
    let c = (frac * n as f64 + 1e-9).floor() as usize;
    c.min(n)
}

/// Fisher-Yates from the last index down, drawing `j` uniformly from `0..=i`
/// as the high 64 bits of `next_u64() * (i + 1)`.
pub fn seeded_shuffle<T>(items: &mut [T], seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..items.len()).rev() {
        let j = ((rng.next_u64() as u128 * (i as u128 + 1)) >> 64) as usize;
        items.swap(i, j);
    }
}

/// Assigns every file a split. Snippets given as `(snippet_id, file_id)`
/// inherit their file's split.
pub fn assign_splits(
    files: &[SplitInput],
    snippets: &[(String, String)],
    cfg: &SplitConfig,
    corpus_id: &str,
    config_fingerprint: &str,
) -> Result<DatasetManifest, DatasetError> {
    cfg.validate()?;
    let mut records: Vec<FileRecord> = files
        .iter()
        .map(|f| FileRecord {
            file_id: f.file_id.clone(),
            repo_id: f.repo_id.clone(),
            stars: f.stars,
            split: Split::Train,
            eligible: is_eligible(f.stars, f.snippet_count),
            parsable: false,
            snippet_count: f.snippet_count,
        })
        .collect();
    records.sort_by(|a, b| a.file_id.cmp(&b.file_id));
    records.dedup_by(|a, b| a.file_id == b.file_id);

    let eligible: Vec<usize> = (0..records.len()).filter(|&i| records[i].eligible).collect();
    let n_val = split_count(cfg.val_frac, eligible.len());
    let n_test = split_count(cfg.test_frac, eligible.len()).min(eligible.len() - n_val);

    if cfg.split_by_repo {
        let mut by_repo: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for &i in &eligible {
            by_repo.entry(records[i].repo_id.as_str()).or_default().push(i);
        }
        let mut groups: Vec<Vec<usize>> = by_repo.into_values().collect();
        seeded_shuffle(&mut groups, cfg.seed);
        let (mut val, mut test) = (0usize, 0usize);
        for g in groups {
            let split = if val < n_val {
                val += g.len();
                Split::Validation
            } else if test < n_test {
                test += g.len();
                Split::Test
            } else {
                Split::Train
            };
            for i in g {
                records[i].split = split;
            }
        }
    } else {
        let mut order = eligible;
        seeded_shuffle(&mut order, cfg.seed);
        for (rank, &i) in order.iter().enumerate() {
            records[i].split = if rank < n_val {
                Split::Validation
            } else if rank < n_val + n_test {
                Split::Test
            } else {
                Split::Train
            };
        }
    }

    let mut snippet_records = Vec::with_capacity(snippets.len());
    for (snippet_id, file_id) in snippets {
        let idx = records
            .binary_search_by(|f| f.file_id.cmp(file_id))
            .map_err(|_| DatasetError::UnknownFile { snippet_id: snippet_id.clone(), file_id: file_id.clone() })?;
        snippet_records.push(SnippetRecord {
            snippet_id: snippet_id.clone(),
            file_id: file_id.clone(),
            split: records[idx].split,
            parsable: records[idx].parsable,
        });
    }
    snippet_records.sort_by(|a, b| a.snippet_id.cmp(&b.snippet_id));

    Ok(DatasetManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        corpus_id: corpus_id.to_string(),
        seed: cfg.seed,
        val_frac: cfg.val_frac,
        test_frac: cfg.test_frac,
        split_by_repo: cfg.split_by_repo,
        config_fingerprint: config_fingerprint.to_string(),
        parsability_checker: None,
        files: records,
        snippets: snippet_records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetName {
    FullFiles,
    ParsableFiles,
    Snippets,
    ParsableSnippets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    File,
    Snippet,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::File => "file",
            Unit::Snippet => "snippet",
        }
    }
}

impl SubsetName {
    pub const ALL: [SubsetName; 4] =
        [SubsetName::FullFiles, SubsetName::ParsableFiles, SubsetName::Snippets, SubsetName::ParsableSnippets];

    pub fn unit(self) -> Unit {
        match self {
            SubsetName::FullFiles | SubsetName::ParsableFiles => Unit::File,
            SubsetName::Snippets | SubsetName::ParsableSnippets => Unit::Snippet,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SubsetName::FullFiles => "full_files",
            SubsetName::ParsableFiles => "parsable_files",
            SubsetName::Snippets => "snippets",
            SubsetName::ParsableSnippets => "parsable_snippets",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|n| n.as_str() == s)
    }
}

impl fmt::Display for SubsetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Unit ids of a training subset, sorted.
pub fn select_subset(manifest: &DatasetManifest, subset: SubsetName) -> Vec<String> {
    select_units(manifest, subset, Split::Train)
}

/// Unit ids of `split` at the granularity and parsability filter of `subset`.
pub fn select_units(manifest: &DatasetManifest, subset: SubsetName, split: Split) -> Vec<String> {
    let need_parsable = matches!(subset, SubsetName::ParsableFiles | SubsetName::ParsableSnippets);
    match subset.unit() {
        Unit::File => manifest
            .files
            .iter()
            .filter(|f| f.split == split && (!need_parsable || f.parsable))
            .map(|f| f.file_id.clone())
            .collect(),
        Unit::Snippet => manifest
            .snippets
            .iter()
            .filter(|s| s.split == split && (!need_parsable || s.parsable))
            .map(|s| s.snippet_id.clone())
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsRow {
    pub label: String,
    pub files: usize,
    pub snippets: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    /// Train (All), Train (Parsable), Validation, Test, Total.
    pub rows: Vec<StatsRow>,
    /// Unit count of each training subset.
    pub subsets: BTreeMap<String, usize>,
}

pub fn stats(manifest: &DatasetManifest) -> DatasetStats {
    let files = |split: Split, parsable_only: bool| {
        manifest.files.iter().filter(|f| f.split == split && (!parsable_only || f.parsable)).count()
    };
    let snippets = |split: Split, parsable_only: bool| {
        manifest.snippets.iter().filter(|s| s.split == split && (!parsable_only || s.parsable)).count()
    };
    let row = |label: &str, files: usize, snippets: usize| StatsRow { label: label.to_string(), files, snippets };
    let train = row("Train (All)", files(Split::Train, false), snippets(Split::Train, false));
    let val = row("Validation", files(Split::Validation, false), snippets(Split::Validation, false));
    let test = row("Test", files(Split::Test, false), snippets(Split::Test, false));
    let total = row(
        "Total",
        train.files + val.files + test.files,
        train.snippets + val.snippets + test.snippets,
    );
    let parsable = row("Train (Parsable)", files(Split::Train, true), snippets(Split::Train, true));
    let subsets =
        SubsetName::ALL.iter().map(|&s| (s.as_str().to_string(), select_subset(manifest, s).len())).collect();
    DatasetStats { rows: vec![train, parsable, val, test, total], subsets }
}

impl DatasetStats {
    pub fn row(&self, label: &str) -> Option<&StatsRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Aligned plain-text table with thousands separators.
    pub fn render(&self) -> String {
        let header = ["Split", "Files", "Snippets"];
        let body: Vec<[String; 3]> = self
            .rows
            .iter()
            .map(|r| [r.label.clone(), group_thousands(r.files), group_thousands(r.snippets)])
            .collect();
        let mut widths = header.map(str::len);
        for r in &body {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = format!("{:<w0$}  {:>w1$}  {:>w2$}\n", header[0], header[1], header[2], w0 = widths[0], w1 = widths[1], w2 = widths[2]);
        for r in &body {
            out.push_str(&format!("{:<w0$}  {:>w1$}  {:>w2$}\n", r[0], r[1], r[2], w0 = widths[0], w1 = widths[1], w2 = widths[2]));
        }
        out
    }
}

pub fn group_thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn input(id: &str, stars: u64, snippets: usize) -> SplitInput {
        SplitInput { file_id: id.into(), repo_id: format!("r/{}", &id[..1]), stars, snippet_count: snippets }
    }

    fn inputs(eligible: usize, ineligible: usize) -> Vec<SplitInput> {
        let mut v = Vec::new();
        for i in 0..eligible {
            v.push(input(&format!("e{i:06}"), 1 + (i % 5) as u64, 1 + i % 3));
        }
        for i in 0..ineligible {
            let (stars, sn) = if i % 2 == 0 { (0, 2) } else { (4, 0) };
            v.push(input(&format!("i{i:06}"), stars, sn));
        }
        v
    }

    fn count(m: &DatasetManifest, split: Split, eligible: bool) -> usize {
        m.files.iter().filter(|f| f.split == split && f.eligible == eligible).count()
    }

    #[test]
    fn fraction_arithmetic_on_ten_thousand_eligible() {
        let m = assign_splits(&inputs(10_000, 5_000), &[], &SplitConfig::default(), "c", "fp").unwrap();
        assert_eq!(count(&m, Split::Validation, true), 1_500);
        assert_eq!(count(&m, Split::Test, true), 3_500);
        assert_eq!(count(&m, Split::Train, true), 5_000);
        assert_eq!(count(&m, Split::Validation, false) + count(&m, Split::Test, false), 0);
        m.check_invariants().unwrap();
    }

    #[test]
    fn zero_star_file_goes_to_train() {
        let m = assign_splits(&[input("a", 0, 3)], &[], &SplitConfig::default(), "c", "fp").unwrap();
        assert_eq!(m.files[0].split, Split::Train);
        assert!(!m.files[0].eligible);
    }

    #[test]
    fn split_count_floors() {
        assert_eq!(split_count(0.15, 10_000), 1_500);
        assert_eq!(split_count(0.35, 10_000), 3_500);
        assert_eq!(split_count(0.15, 7), 1);
        assert_eq!(split_count(0.35, 7), 2);
        assert_eq!(split_count(0.0, 7), 0);
        assert_eq!(split_count(1.0, 7), 7);
    }

    #[test]
    fn rejects_bad_fractions() {
        let cfg = SplitConfig { val_frac: 0.7, test_frac: 0.4, ..Default::default() };
        assert!(matches!(assign_splits(&[], &[], &cfg, "c", "f"), Err(DatasetError::Fractions { .. })));
        let cfg = SplitConfig { val_frac: -0.1, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn shuffle_is_a_seeded_permutation() {
        let mut a: Vec<u32> = (0..100).collect();
        let mut b = a.clone();
        seeded_shuffle(&mut a, 7);
        seeded_shuffle(&mut b, 7);
        assert_eq!(a, b);
        let mut c: Vec<u32> = (0..100).collect();
        seeded_shuffle(&mut c, 8);
        assert_ne!(a, c);
        a.sort();
        assert_eq!(a, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn snippets_inherit_split_and_parsability() {
        let files = vec![input("a1", 3, 2), input("b1", 0, 1), input("c1", 2, 1)];
        let snippets = vec![
            ("a1:0".to_string(), "a1".to_string()),
            ("a1:50".to_string(), "a1".to_string()),
            ("b1:0".to_string(), "b1".to_string()),
            ("c1:0".to_string(), "c1".to_string()),
        ];
        let cfg = SplitConfig { val_frac: 0.5, test_frac: 0.5, ..Default::default() };
        let mut m = assign_splits(&files, &snippets, &cfg, "c", "f").unwrap();
        let flags: BTreeMap<String, bool> = [("a1".to_string(), true)].into();
        m.set_parsable(&flags, "internal");
        m.check_invariants().unwrap();
        assert!(m.snippets.iter().filter(|s| s.file_id == "a1").all(|s| s.parsable));
        assert_eq!(m.parsability_checker.as_deref(), Some("internal"));
        let err = assign_splits(&files, &[("x:0".into(), "zz".into())], &cfg, "c", "f").unwrap_err();
        assert!(matches!(err, DatasetError::UnknownFile { .. }));
    }

    #[test]
    fn subsets_are_train_only_and_nested() {
        let files = vec![input("a1", 3, 1), input("b1", 0, 1), input("c1", 2, 1)];
        let snippets: Vec<(String, String)> =
            ["a1", "b1", "c1"].iter().map(|f| (format!("{f}:0"), f.to_string())).collect();
        let cfg = SplitConfig { val_frac: 0.5, test_frac: 0.0, ..Default::default() };
        let mut m = assign_splits(&files, &snippets, &cfg, "c", "f").unwrap();
        m.set_parsable(&[("c1".to_string(), true)].into(), "internal");
        let train: BTreeSet<&str> =
            m.files.iter().filter(|f| f.split == Split::Train).map(|f| f.file_id.as_str()).collect();
        for s in SubsetName::ALL {
            for id in select_subset(&m, s) {
                assert!(train.contains(id.split(':').next().unwrap()));
            }
        }
        let snip = select_subset(&m, SubsetName::Snippets);
        let psnip = select_subset(&m, SubsetName::ParsableSnippets);
        assert!(snip.contains(&"b1:0".to_string()));
        assert!(!psnip.contains(&"b1:0".to_string()));
    }

    #[test]
    fn stats_of_empty_manifest_are_zero() {
        let m = assign_splits(&[], &[], &SplitConfig::default(), "c", "f").unwrap();
        let s = stats(&m);
        assert!(s.rows.iter().all(|r| r.files == 0 && r.snippets == 0));
        assert!(s.subsets.values().all(|&v| v == 0));
    }

    #[test]
    fn split_by_repo_keeps_repos_together() {
        let files: Vec<SplitInput> = (0..60)
            .map(|i| SplitInput {
                file_id: format!("f{i:03}"),
                repo_id: format!("repo{}", i % 12),
                stars: 1,
                snippet_count: 1,
            })
            .collect();
        let cfg = SplitConfig { split_by_repo: true, ..Default::default() };
        let m = assign_splits(&files, &[], &cfg, "c", "f").unwrap();
        let mut repo_split: BTreeMap<&str, Split> = BTreeMap::new();
        for f in &m.files {
            assert_eq!(*repo_split.entry(f.repo_id.as_str()).or_insert(f.split), f.split);
        }
        assert!(count(&m, Split::Validation, true) >= split_count(0.15, 60));
        assert!(count(&m, Split::Test, true) > 0);
    }

    #[test]
    fn thousands_grouping() {
        assert_eq!(group_thousands(0), "0");
        assert_eq!(group_thousands(999), "999");
        assert_eq!(group_thousands(1_000), "1,000");
        assert_eq!(group_thousands(142_283), "142,283");
        assert_eq!(group_thousands(1_234_567), "1,234,567");
    }

    proptest! {
        #[test]
        fn input_order_does_not_change_splits(
            stars in prop::collection::vec((0u64..3, 0usize..3), 1..80),
            seed in any::<u64>(),
            rot in 0usize..80,
        ) {
            let files: Vec<SplitInput> = stars
                .iter()
                .enumerate()
                .map(|(i, &(s, n))| SplitInput { file_id: format!("f{i:03}"), repo_id: "r".into(), stars: s, snippet_count: n })
                .collect();
            let mut rotated = files.clone();
            let k = rot % rotated.len();
            rotated.rotate_left(k);
            rotated.reverse();
            let cfg = SplitConfig { seed, ..Default::default() };
            let a = assign_splits(&files, &[], &cfg, "c", "f").unwrap();
            let b = assign_splits(&rotated, &[], &cfg, "c", "f").unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert!(a.check_invariants().is_ok());
            for f in &a.files {
                if f.split != Split::Train {
                    prop_assert!(f.stars >= 1 && f.snippet_count >= 1);
                }
            }
        }

        #[test]
        fn stats_rows_sum_to_total(
            splits in prop::collection::vec((0u64..3, 0usize..4, any::<bool>()), 0..60),
            seed in any::<u64>(),
        ) {
            let files: Vec<SplitInput> = splits
                .iter()
                .enumerate()
                .map(|(i, &(s, n, _))| SplitInput { file_id: format!("f{i:03}"), repo_id: "r".into(), stars: s, snippet_count: n })
                .collect();
            let snippets: Vec<(String, String)> = files
                .iter()
                .flat_map(|f| (0..f.snippet_count).map(move |k| (format!("{}:{k}", f.file_id), f.file_id.clone())))
                .collect();
            let mut m = assign_splits(&files, &snippets, &SplitConfig { seed, ..Default::default() }, "c", "f").unwrap();
            let flags = files.iter().zip(&splits).map(|(f, s)| (f.file_id.clone(), s.2)).collect();
            m.set_parsable(&flags, "internal");
            let st = stats(&m);
            let get = |l: &str| st.row(l).unwrap().clone();
            let (tr, va, te, to, pa) = (get("Train (All)"), get("Validation"), get("Test"), get("Total"), get("Train (Parsable)"));
            prop_assert_eq!(to.files, tr.files + va.files + te.files);
            prop_assert_eq!(to.snippets, tr.snippets + va.snippets + te.snippets);
            prop_assert_eq!(to.files, m.files.len());
            prop_assert_eq!(to.snippets, m.snippets.len());
            prop_assert!(pa.files <= tr.files && pa.snippets <= tr.snippets);
            let full: BTreeSet<String> = select_subset(&m, SubsetName::FullFiles).into_iter().collect();
            prop_assert!(select_subset(&m, SubsetName::ParsableFiles).iter().all(|id| full.contains(id)));
        }
    }
}
