//! Pipeline stages. Each reads its predecessors' artifacts under the output
//! directory, checks their config fingerprint and writes its own.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vcf_core::artifact::{self, ArtifactHeader, SCHEMA_VERSION};
use vcf_core::audit::AuditEntry;
use vcf_core::dataset::{
    self, build_records, chunk_units, select_subset, select_units, tag_parsable, write_chunks, write_csv, ChunkMeta,
    DatasetManifest, ExportRecord, ParseCache, Split, SplitInput, SubsetName, SystemRunner, UnitSource,
};
use vcf_core::dedup::{exact_dedup, near_dedup, Candidate, DupCluster, NearEntry};
use vcf_core::extract::{extract_from_source, Snippet};
use vcf_core::filters::apply_filters;
use vcf_core::ingest::{self, IngestError, RepoRecord, SourceFile};
use vcf_core::lexer;
use vcf_core::lm::{LmError, NGramModel};
use vcf_core::metrics::{evaluate_completions, render_table, MetricReport, MetricsError, Prediction};

use crate::config::{self, PipelineConfig};
use crate::error::{from_artifact, invalid, runtime, CliError, CliResult};

/// A JSON artifact: the header next to the payload's own fields.
#[derive(Debug, Serialize, Deserialize)]
pub struct Doc<T> {
    pub artifact: ArtifactHeader,
    #[serde(flatten)]
    pub body: T,
}

#[derive(Debug, Serialize, Deserialize)]
struct ConfigDoc {
    config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub pass: String,
    pub representative_id: String,
    pub member_ids: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportSet {
    pub reports: Vec<MetricReport>,
}

pub mod paths {
    pub const INGEST_REPOS: &str = "ingest/repos.jsonl";
    pub const INGEST_FILES: &str = "ingest/files.jsonl";
    pub const INGEST_AUDIT: &str = "ingest/audit.jsonl";
    pub const FILTER_DECISIONS: &str = "filter/decisions.jsonl";
    pub const FILTER_FILES: &str = "filter/files.jsonl";
    pub const DEDUP_CLUSTERS: &str = "dedup/clusters.jsonl";
    pub const DEDUP_FILES: &str = "dedup/files.jsonl";
    pub const SNIPPETS: &str = "extract/snippets.jsonl";
    pub const EXTRACT_AUDIT: &str = "extract/audit.jsonl";
    pub const MANIFEST: &str = "split/manifest.json";
    pub const PARSE_CACHE: &str = "split/parse_cache.json";
    pub const SPLIT_AUDIT: &str = "split/audit.jsonl";
    pub const EVAL_VALIDATION: &str = "export/eval_validation.jsonl";
    pub const EVAL_TEST: &str = "export/eval_test.jsonl";
    pub const REPORT: &str = "evaluate/report.json";
    pub const REPORT_TABLE: &str = "evaluate/report.txt";

    pub fn export_jsonl(s: &str) -> String {
        format!("export/{s}.jsonl")
    }
    pub fn export_csv(s: &str) -> String {
        format!("export/{s}.csv")
    }
    pub fn chunks(s: &str) -> String {
        format!("export/chunks_{s}.txt")
    }
    pub fn chunks_meta(s: &str) -> String {
        format!("export/chunks_{s}.meta.json")
    }
    pub fn model(s: &str) -> String {
        format!("lm/model_{s}.vlm")
    }
    pub fn predictions(s: &str) -> String {
        format!("complete/predictions_{s}.jsonl")
    }
    pub fn report(s: &str) -> String {
        format!("evaluate/report_{s}.json")
    }
}

pub struct Pipeline {
    pub cfg: PipelineConfig,
    pub fingerprint: String,
    pub out: PathBuf,
    /// Accept predecessor artifacts produced under a different config.
    pub force: bool,
}

fn ingest_err(e: IngestError) -> CliError {
    match e {
        IngestError::Io { ref source, .. } if source.kind() != std::io::ErrorKind::NotFound => runtime(e),
        e => invalid(e),
    }
}

fn dataset_err(e: dataset::DatasetError) -> CliError {
    use dataset::DatasetError as E;
    match e {
        E::Io(_) | E::Csv(_) => runtime(e),
        E::Artifact(a) => from_artifact(a),
        e => invalid(e),
    }
}

fn lm_err(e: LmError) -> CliError {
    match e {
        LmError::Artifact(a) => from_artifact(a),
        e => invalid(e),
    }
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig, out: impl Into<PathBuf>, force: bool) -> CliResult<Self> {
        cfg.validate()?;
        let fingerprint = cfg.fingerprint();
        let p = Self { cfg, fingerprint, out: out.into(), force };
        p.snapshot_config()?;
        Ok(p)
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    fn header(&self, stage: &str) -> ArtifactHeader {
        ArtifactHeader::new(self.fingerprint.clone(), stage)
    }

    fn config_path(&self, fingerprint: &str) -> PathBuf {
        self.out.join("config").join(format!("{fingerprint}.json"))
    }

    fn snapshot_config(&self) -> CliResult<()> {
        let path = self.config_path(&self.fingerprint);
        if path.exists() {
            return Ok(());
        }
        let doc = Doc { artifact: self.header("config"), body: ConfigDoc { config: self.cfg.canonical_json() } };
        artifact::write_json(&path, &doc).map_err(from_artifact)
    }

    /// Fails unless `header` was produced under this config (or `--force`).
    fn check(&self, path: &Path, header: Option<&ArtifactHeader>) -> CliResult<()> {
        let header = header.ok_or_else(|| invalid(format!("{}: missing artifact header", path.display())))?;
        if header.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "{}: schema version {} (expected {SCHEMA_VERSION})",
                path.display(),
                header.schema_version
            )));
        }
        if header.config_fingerprint == self.fingerprint {
            return Ok(());
        }
        if self.force {
            tracing::warn!(artifact = %path.display(), fingerprint = %header.config_fingerprint, "using artifact from a different config (--force)");
            return Ok(());
        }
        let changes = match artifact::read_json::<Doc<ConfigDoc>>(&self.config_path(&header.config_fingerprint)) {
            Ok(old) => config::diff(&old.body.config, &self.cfg.canonical_json()),
            Err(_) => vec![format!("(no snapshot of config {})", header.config_fingerprint)],
        };
        Err(CliError::Validation(format!(
            "{} was produced by stage `{}` under config {}, current config is {}; changed keys:\n  {}\n(rerun the stage or pass --force)",
            path.display(),
            header.stage,
            header.config_fingerprint,
            self.fingerprint,
            changes.join("\n  ")
        )))
    }

    fn require(&self, rel: &str, producer: &str) -> CliResult<PathBuf> {
        let path = self.path(rel);
        if !path.exists() {
            return Err(invalid(format!("missing artifact {}; run `vcf {producer}` first", path.display())));
        }
        Ok(path)
    }

    fn load_jsonl<T: DeserializeOwned>(&self, rel: &str, producer: &str) -> CliResult<Vec<T>> {
        let path = self.require(rel, producer)?;
        let (header, records) = artifact::read_jsonl(&path).map_err(from_artifact)?;
        self.check(&path, header.as_ref())?;
        Ok(records)
    }

    fn load_doc<T: DeserializeOwned>(&self, rel: &str, producer: &str) -> CliResult<T> {
        let path = self.require(rel, producer)?;
        let header = artifact::read_header(&path).map_err(from_artifact)?;
        self.check(&path, Some(&header))?;
        let doc: Doc<T> = artifact::read_json(&path).map_err(from_artifact)?;
        Ok(doc.body)
    }

    fn save_jsonl<T: Serialize>(&self, rel: &str, stage: &str, records: &[T]) -> CliResult<()> {
        artifact::write_jsonl(&self.path(rel), Some(&self.header(stage)), records).map_err(from_artifact)
    }

    fn save_doc<T: Serialize>(&self, rel: &str, stage: &str, body: T) -> CliResult<()> {
        artifact::write_json(&self.path(rel), &Doc { artifact: self.header(stage), body }).map_err(from_artifact)
    }

    fn save_text(&self, rel: &str, stage: &str, text: &str) -> CliResult<()> {
        let line = self.header(stage).text_line();
        artifact::write_atomically(&self.path(rel), |w| {
            writeln!(w, "{line}")?;
            w.write_all(text.as_bytes())
        })
        .map_err(from_artifact)
    }

    // -----------------------------------------------------------------------

    pub fn ingest(&self) -> CliResult<()> {
        let s = &self.cfg.ingest;
        if s.offline_root.is_empty() {
            return Err(invalid("ingest.offline_root is not set"));
        }
        let exts = ingest::normalize_extensions(&s.extensions);
        let allow: BTreeSet<String> = s.license_allowlist.iter().map(|l| l.to_lowercase()).collect();
        let corpus = ingest::ingest_offline(Path::new(&s.offline_root), &exts, &allow).map_err(ingest_err)?;
        let admitted_ids: BTreeSet<&str> = corpus.admitted.iter().map(|r| r.repo_id.as_str()).collect();
        let mut audit = corpus.audit.clone();
        let mut repos = Vec::new();
        for r in &corpus.repos {
            if !admitted_ids.contains(r.repo_id.as_str()) {
                audit.push(AuditEntry::new("ingest", &r.repo_id, "license_not_allowed", &r.license_id));
            } else if s.exclude_forks && r.fork {
                audit.push(AuditEntry::new("ingest", &r.repo_id, "fork_excluded", &r.url));
            } else {
                repos.push(r.clone());
            }
        }
        let kept: BTreeSet<&str> = repos.iter().map(|r| r.repo_id.as_str()).collect();
        let files: Vec<&SourceFile> = corpus.files.iter().filter(|f| kept.contains(f.repo_id.as_str())).collect();
        self.save_jsonl(paths::INGEST_REPOS, "ingest", &repos)?;
        self.save_jsonl(paths::INGEST_FILES, "ingest", &files)?;
        self.save_jsonl(paths::INGEST_AUDIT, "ingest", &audit)?;
        tracing::info!(stage = "ingest", repos = corpus.repos.len(), admitted = repos.len(), files = files.len(), "stage finished");
        Ok(())
    }

    pub fn filter(&self) -> CliResult<()> {
        let files: Vec<SourceFile> = self.load_jsonl(paths::INGEST_FILES, "ingest")?;
        let outcome = apply_filters(&files, &self.cfg.filters);
        self.save_jsonl(paths::FILTER_DECISIONS, "filter", &outcome.decisions)?;
        self.save_jsonl(paths::FILTER_FILES, "filter", &outcome.kept)?;
        tracing::info!(stage = "filter", input = files.len(), kept = outcome.kept.len(), "stage finished");
        Ok(())
    }

    fn stars(&self) -> CliResult<BTreeMap<String, u64>> {
        let repos: Vec<RepoRecord> = self.load_jsonl(paths::INGEST_REPOS, "ingest")?;
        Ok(repos.into_iter().map(|r| (r.repo_id, r.stars)).collect())
    }

    pub fn dedup(&self) -> CliResult<()> {
        let files: Vec<SourceFile> = self.load_jsonl(paths::FILTER_FILES, "filter")?;
        let stars = self.stars()?;
        let exact = exact_dedup(&files, &stars);
        let exact_kept: BTreeSet<&str> = exact.kept.iter().map(String::as_str).collect();
        let survivors: Vec<&SourceFile> = files.iter().filter(|f| exact_kept.contains(f.file_id.as_str())).collect();
        let entries: Vec<NearEntry> = survivors
            .par_iter()
            .map(|f| NearEntry {
                candidate: Candidate::of(f, stars.get(&f.repo_id).copied().unwrap_or(0)),
                tokens: lexer::token_set(&lexer::lex(&f.content)),
            })
            .collect();
        let near = near_dedup(&entries, &self.cfg.near_dedup()).map_err(invalid)?;
        let near_kept: BTreeSet<&str> = near.kept.iter().map(String::as_str).collect();
        let kept: Vec<&SourceFile> = survivors.into_iter().filter(|f| near_kept.contains(f.file_id.as_str())).collect();
        let record = |pass: &str, c: &DupCluster| ClusterRecord {
            pass: pass.to_string(),
            representative_id: c.representative_id.clone(),
            member_ids: c.member_ids.clone(),
        };
        let clusters: Vec<ClusterRecord> = exact
            .clusters
            .iter()
            .filter(|c| c.member_ids.len() > 1)
            .map(|c| record("exact", c))
            .chain(near.clusters.iter().filter(|c| c.member_ids.len() > 1).map(|c| record("near", c)))
            .collect();
        self.save_jsonl(paths::DEDUP_CLUSTERS, "dedup", &clusters)?;
        self.save_jsonl(paths::DEDUP_FILES, "dedup", &kept)?;
        tracing::info!(
            stage = "dedup",
            input = files.len(),
            after_exact = exact.kept.len(),
            kept = kept.len(),
            "stage finished"
        );
        Ok(())
    }

    pub fn extract(&self) -> CliResult<()> {
        let files: Vec<SourceFile> = self.load_jsonl(paths::DEDUP_FILES, "dedup")?;
        let outcomes: Vec<_> = files.par_iter().map(|f| extract_from_source(&f.content, &f.file_id)).collect();
        let mut snippets = Vec::new();
        let mut audit = Vec::new();
        for o in outcomes {
            snippets.extend(o.snippets);
            audit.extend(o.audit);
        }
        self.save_jsonl(paths::SNIPPETS, "extract", &snippets)?;
        self.save_jsonl(paths::EXTRACT_AUDIT, "extract", &audit)?;
        tracing::info!(stage = "extract", files = files.len(), snippets = snippets.len(), "stage finished");
        Ok(())
    }

    pub fn split(&self) -> CliResult<()> {
        let files: Vec<SourceFile> = self.load_jsonl(paths::DEDUP_FILES, "dedup")?;
        let snippets: Vec<Snippet> = self.load_jsonl(paths::SNIPPETS, "extract")?;
        let stars = self.stars()?;
        let mut per_file: BTreeMap<&str, usize> = BTreeMap::new();
        for s in &snippets {
            *per_file.entry(s.file_id.as_str()).or_default() += 1;
        }
        let inputs: Vec<SplitInput> = files
            .iter()
            .map(|f| SplitInput {
                file_id: f.file_id.clone(),
                repo_id: f.repo_id.clone(),
                stars: stars.get(&f.repo_id).copied().unwrap_or(0),
                snippet_count: per_file.get(f.file_id.as_str()).copied().unwrap_or(0),
            })
            .collect();
        let pairs: Vec<(String, String)> =
            snippets.iter().map(|s| (s.snippet_id.clone(), s.file_id.clone())).collect();
        let mut manifest =
            dataset::assign_splits(&inputs, &pairs, &self.cfg.split_config(), &corpus_id(&files), &self.fingerprint)
                .map_err(dataset_err)?;

        let cache_path = self.path(paths::PARSE_CACHE);
        let mut cache: ParseCache = artifact::read_json::<Doc<ParseCache>>(&cache_path).map(|d| d.body).unwrap_or_default();
        let scratch = self.path("split/.scratch");
        let report = tag_parsable(
            &mut manifest,
            &files,
            &self.cfg.parse.commands,
            self.cfg.parse.fallback,
            &SystemRunner,
            &mut cache,
            &scratch,
        );
        let _ = std::fs::remove_dir_all(&scratch);
        let report = report.map_err(dataset_err)?;
        manifest.check_invariants().map_err(|e| CliError::Runtime(format!("manifest invariant violated: {e}")))?;

        self.save_doc(paths::PARSE_CACHE, "split", &cache)?;
        self.save_jsonl(paths::SPLIT_AUDIT, "split", &report.audit)?;
        self.save_doc(paths::MANIFEST, "split", &manifest)?;
        let st = dataset::stats(&manifest);
        tracing::info!(
            stage = "split",
            files = manifest.files.len(),
            snippets = manifest.snippets.len(),
            checker = %report.checker,
            parser_invocations = report.invocations,
            cache_hits = report.cache_hits,
            "stage finished"
        );
        tracing::debug!(stats = ?st.rows, "split statistics");
        Ok(())
    }

    pub fn manifest(&self) -> CliResult<DatasetManifest> {
        self.load_doc(paths::MANIFEST, "split")
    }

    pub fn export(&self, subsets: &[SubsetName]) -> CliResult<()> {
        let manifest = self.manifest()?;
        let files: Vec<SourceFile> = self.load_jsonl(paths::DEDUP_FILES, "dedup")?;
        let snippets: Vec<Snippet> = self.load_jsonl(paths::SNIPPETS, "extract")?;
        let source = UnitSource::new(files, snippets);
        for &subset in subsets {
            let name = subset.as_str();
            let ids = select_subset(&manifest, subset);
            let records = build_records(&manifest, subset.unit(), &ids, &source).map_err(dataset_err)?;
            let header = self.header("export");
            self.save_jsonl(&paths::export_jsonl(name), "export", &records)?;
            write_csv(&self.path(&paths::export_csv(name)), Some(&header), &records).map_err(dataset_err)?;
            let set = chunk_units(records.iter().map(|r| r.text.as_str()), self.cfg.export.chunk_size);
            write_chunks(&self.path(&paths::chunks(name)), Some(&header), &set).map_err(dataset_err)?;
            self.save_doc(&paths::chunks_meta(name), "export", &set.meta)?;
            tracing::info!(stage = "export", subset = name, units = records.len(), chunks = set.meta.chunk_count, "subset exported");
        }
        for (split, rel) in [(Split::Validation, paths::EVAL_VALIDATION), (Split::Test, paths::EVAL_TEST)] {
            let ids = select_units(&manifest, SubsetName::Snippets, split);
            let records = build_records(&manifest, dataset::Unit::Snippet, &ids, &source).map_err(dataset_err)?;
            self.save_jsonl(rel, "export", &records)?;
        }
        Ok(())
    }

    pub fn chunk_meta(&self, subset: SubsetName) -> CliResult<ChunkMeta> {
        self.load_doc(&paths::chunks_meta(subset.as_str()), "export")
    }

    pub fn train_lm(&self, subsets: &[SubsetName]) -> CliResult<()> {
        for &subset in subsets {
            let name = subset.as_str();
            let records: Vec<ExportRecord> = self.load_jsonl(&paths::export_jsonl(name), "export")?;
            let docs: Vec<Vec<String>> = records.par_iter().map(|r| lexer::tokenize(&r.text)).collect();
            let model = NGramModel::train(&docs, self.cfg.lm.lm_config())
                .map_err(|e| invalid(format!("training on subset {name}: {e}")))?;
            model.save(&self.path(&paths::model(name)), &self.header("train-lm")).map_err(lm_err)?;
            tracing::info!(stage = "train-lm", subset = name, documents = docs.len(), vocab = model.vocab().len(), "model trained");
        }
        Ok(())
    }

    pub fn load_model(&self, subset: SubsetName) -> CliResult<NGramModel> {
        let path = self.require(&paths::model(subset.as_str()), "train-lm")?;
        let (model, header) = NGramModel::load(&path).map_err(lm_err)?;
        self.check(&path, Some(&header))?;
        Ok(model)
    }

    fn eval_records(&self) -> CliResult<Vec<ExportRecord>> {
        self.load_jsonl(paths::EVAL_TEST, "export")
    }

    pub fn complete(&self, subsets: &[SubsetName]) -> CliResult<()> {
        let eval = self.eval_records()?;
        for &subset in subsets {
            let model = self.load_model(subset)?;
            let max_tokens = self.cfg.lm.max_tokens;
            let predictions: Vec<Prediction> = eval
                .par_iter()
                .map(|r| Prediction {
                    snippet_id: r.id.clone(),
                    completion: model.complete_greedy(&r.definition, max_tokens).detokenized_text,
                })
                .collect();
            self.save_jsonl(&paths::predictions(subset.as_str()), "complete", &predictions)?;
            tracing::info!(stage = "complete", subset = subset.as_str(), predictions = predictions.len(), "completions written");
        }
        Ok(())
    }

    pub fn model_id(&self) -> String {
        format!("ngram-o{}", self.cfg.lm.order)
    }

    fn references(&self, eval: &[ExportRecord]) -> BTreeMap<String, String> {
        eval.iter().map(|r| (r.id.clone(), r.body.clone())).collect()
    }

    fn score(
        &self,
        model_id: &str,
        subset: &str,
        predictions: &[Prediction],
        eval: &[ExportRecord],
        perplexity: Option<f64>,
    ) -> CliResult<MetricReport> {
        evaluate_completions(model_id, subset, predictions, &self.references(eval), perplexity, &self.cfg.metrics.metric_config())
            .map_err(|e: MetricsError| invalid(e))
    }

    /// Scores the built-in models' predictions and writes the per-subset and
    /// combined reports. Returns the rendered table.
    pub fn evaluate(&self, subsets: &[SubsetName]) -> CliResult<String> {
        self.manifest()?;
        let eval = self.eval_records()?;
        let docs: Vec<Vec<String>> = eval.par_iter().map(|r| lexer::tokenize(&r.text)).collect();
        let mut reports = Vec::new();
        for &subset in subsets {
            let name = subset.as_str();
            let model = self.load_model(subset)?;
            let perplexity = match model.perplexity(&docs) {
                Ok(p) => Some(p),
                Err(LmError::EmptyStream) => None,
                Err(e) => return Err(lm_err(e)),
            };
            let predictions: Vec<Prediction> = self.load_jsonl(&paths::predictions(name), "complete")?;
            let report = self.score(&self.model_id(), name, &predictions, &eval, perplexity)?;
            self.save_doc(&paths::report(name), "evaluate", &report)?;
            tracing::info!(stage = "evaluate", subset = name, bleu = report.bleu, rouge_l = report.rouge_l, chrf = report.chrf, "subset evaluated");
            reports.push(report);
        }
        let table = render_table(&reports);
        self.save_doc(paths::REPORT, "evaluate", ReportSet { reports })?;
        self.save_text(paths::REPORT_TABLE, "evaluate", &table)?;
        Ok(table)
    }

    /// Scores an external predictions file against the test references.
    pub fn evaluate_external(&self, predictions: &Path, model_id: &str, label: &str) -> CliResult<String> {
        let eval = self.eval_records()?;
        let (header, preds): (_, Vec<Prediction>) = artifact::read_jsonl(predictions).map_err(from_artifact)?;
        if header.is_some() {
            self.check(predictions, header.as_ref())?;
        }
        let report = self.score(model_id, label, &preds, &eval, None)?;
        self.save_doc(&paths::report(&format!("{model_id}_{label}")), "evaluate", &report)?;
        Ok(render_table(&[report]))
    }

    pub fn run_all(&self) -> CliResult<String> {
        self.ingest()?;
        self.filter()?;
        self.dedup()?;
        self.extract()?;
        self.split()?;
        self.export(&self.cfg.export.subsets)?;
        self.train_lm(&self.cfg.lm.subsets)?;
        self.complete(&self.cfg.lm.subsets)?;
        self.evaluate(&self.cfg.lm.subsets)
    }
}

fn corpus_id(files: &[SourceFile]) -> String {
    let mut ids: Vec<&str> = files.iter().map(|f| f.file_id.as_str()).collect();
    ids.sort_unstable();
    let mut h = Sha256::new();
    for id in ids {
        h.update(id.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())[..16].to_string()
}
