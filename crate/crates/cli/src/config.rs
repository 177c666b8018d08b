//! Pipeline configuration, `key=value` overrides and the config fingerprint.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vcf_core::dataset::{ParserCommand, SplitConfig, SubsetName, CHUNK_SIZE};
use vcf_core::dedup::{DedupMode, NearDedupConfig};
use vcf_core::filters::FilterConfig;
use vcf_core::ingest::{DiscoveryQuery, DEFAULT_EXTENSIONS, DEFAULT_LICENSE_ALLOWLIST};
use vcf_core::lm::LmConfig;
use vcf_core::metrics::MetricConfig;

use crate::error::{invalid, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestSettings {
    /// Offline corpus directory: `repos.jsonl` plus one snapshot per repository.
    pub offline_root: String,
    pub host: String,
    pub languages: Vec<String>,
    pub cap: usize,
    pub exclude_forks: bool,
    pub extensions: Vec<String>,
    pub license_allowlist: Vec<String>,
}

impl Default for IngestSettings {
    fn default() -> Self {
        let q = DiscoveryQuery::default();
        Self {
            offline_root: String::new(),
            host: q.host,
            languages: q.languages,
            cap: q.cap,
            exclude_forks: q.exclude_forks,
            extensions: DEFAULT_EXTENSIONS.iter().map(|s| s.to_string()).collect(),
            license_allowlist: DEFAULT_LICENSE_ALLOWLIST.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DedupSettings {
    pub threshold: f64,
    pub mode: DedupMode,
    pub hash_count: usize,
    pub bands: usize,
    pub rows: usize,
}

impl Default for DedupSettings {
    fn default() -> Self {
        let d = NearDedupConfig::default();
        Self { threshold: d.threshold, mode: d.mode, hash_count: d.hash_count, bands: d.bands, rows: d.rows }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSettings {
    pub val_frac: f64,
    pub test_frac: f64,
    pub split_by_repo: bool,
}

impl Default for SplitSettings {
    fn default() -> Self {
        let s = SplitConfig::default();
        Self { val_frac: s.val_frac, test_frac: s.test_frac, split_by_repo: s.split_by_repo }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParseSettings {
    /// Tried in order; `{file}` is replaced by the file path.
    pub commands: Vec<ParserCommand>,
    /// Use the built-in structural check when no command is installed.
    pub fallback: bool,
}

impl Default for ParseSettings {
    fn default() -> Self {
        Self {
            commands: vec![
                ParserCommand::new("iverilog", &["iverilog", "-g2012", "-t", "null", "{file}"]),
                ParserCommand::new("verilator", &["verilator", "--lint-only", "-Wno-fatal", "{file}"]),
            ],
            fallback: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExportSettings {
    pub subsets: Vec<SubsetName>,
    pub chunk_size: usize,
}

impl Default for ExportSettings {
    fn default() -> Self {
        Self { subsets: SubsetName::ALL.to_vec(), chunk_size: CHUNK_SIZE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmSettings {
    pub order: usize,
    pub min_count: u64,
    pub backoff_alpha: f64,
    pub max_tokens: usize,
    pub subsets: Vec<SubsetName>,
}

impl Default for LmSettings {
    fn default() -> Self {
        let c = LmConfig::default();
        Self {
            order: c.order,
            min_count: c.min_count,
            backoff_alpha: c.backoff_alpha,
            max_tokens: 256,
            subsets: SubsetName::ALL.to_vec(),
        }
    }
}

impl LmSettings {
    pub fn lm_config(&self) -> LmConfig {
        LmConfig { order: self.order, min_count: self.min_count, backoff_alpha: self.backoff_alpha }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricSettings {
    pub max_n: usize,
    pub chrf_n_max: usize,
    pub beta: f64,
}

impl Default for MetricSettings {
    fn default() -> Self {
        let m = MetricConfig::default();
        Self { max_n: m.max_n, chrf_n_max: m.chrf_n_max, beta: m.beta }
    }
}

impl MetricSettings {
    pub fn metric_config(&self) -> MetricConfig {
        MetricConfig { max_n: self.max_n, chrf_n_max: self.chrf_n_max, beta: self.beta }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Source of all randomness: split shuffle and MinHash permutations.
    pub seed: u64,
    pub ingest: IngestSettings,
    pub filters: FilterConfig,
    pub dedup: DedupSettings,
    pub split: SplitSettings,
    pub parse: ParseSettings,
    pub export: ExportSettings,
    pub lm: LmSettings,
    pub metrics: MetricSettings,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| invalid(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> CliResult<()> {
        self.filters.validate().map_err(|e| invalid(format!("filters: {e}")))?;
        self.near_dedup().validate().map_err(|e| invalid(format!("dedup: {e}")))?;
        self.split_config().validate().map_err(|e| invalid(format!("split: {e}")))?;
        self.lm.lm_config().validate().map_err(|e| invalid(format!("lm: {e}")))?;
        if self.lm.max_tokens == 0 {
            return Err(invalid("lm: max_tokens must be at least 1"));
        }
        if self.export.chunk_size == 0 {
            return Err(invalid("export: chunk_size must be at least 1"));
        }
        if self.metrics.max_n == 0 || self.metrics.chrf_n_max == 0 {
            return Err(invalid("metrics: max_n and chrf_n_max must be at least 1"));
        }
        if !(self.metrics.beta.is_finite() && self.metrics.beta > 0.0) {
            return Err(invalid("metrics: beta must be positive"));
        }
        if self.parse.commands.iter().any(|c| c.argv.is_empty()) {
            return Err(invalid("parse: every command needs a program"));
        }
        Ok(())
    }

    pub fn near_dedup(&self) -> NearDedupConfig {
        let d = &self.dedup;
        NearDedupConfig {
            threshold: d.threshold,
            mode: d.mode,
            hash_count: d.hash_count,
            bands: d.bands,
            rows: d.rows,
            seed: self.seed,
        }
    }

    pub fn split_config(&self) -> SplitConfig {
        SplitConfig {
            seed: self.seed,
            val_frac: self.split.val_frac,
            test_frac: self.split.test_frac,
            split_by_repo: self.split.split_by_repo,
        }
    }

    pub fn discovery_query(&self) -> DiscoveryQuery {
        DiscoveryQuery {
            host: self.ingest.host.clone(),
            languages: self.ingest.languages.clone(),
            cap: self.ingest.cap,
            exclude_forks: self.ingest.exclude_forks,
            ..DiscoveryQuery::default()
        }
    }

    /// Canonical form: JSON with object keys sorted.
    pub fn canonical_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes to JSON")
    }

    /// First 16 hex digits of the SHA-256 of the canonical form.
    pub fn fingerprint(&self) -> String {
        let text = serde_json::to_string(&self.canonical_json()).expect("value serializes");
        hex::encode(Sha256::digest(text.as_bytes()))[..16].to_string()
    }

    /// Sets the dotted `key` to `raw`, parsed as a TOML value or taken as a
    /// bare string. The key must already exist.
    pub fn set(&mut self, key: &str, raw: &str) -> CliResult<()> {
        let mut root = toml::Value::try_from(&*self).expect("config converts to a TOML value");
        let mut slot = &mut root;
        for part in key.split('.') {
            slot = slot
                .as_table_mut()
                .and_then(|t| t.get_mut(part))
                .ok_or_else(|| invalid(format!("unknown config key `{key}`")))?;
        }
        *slot = parse_value(raw);
        *self = root.try_into().map_err(|e| invalid(format!("`{key}={raw}`: {e}")))?;
        Ok(())
    }
}

fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn flatten(prefix: &str, v: &serde_json::Value, out: &mut BTreeMap<String, String>) {
    match v {
        serde_json::Value::Object(m) => {
            for (k, child) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, out);
            }
        }
        other => {
            out.insert(prefix.to_string(), other.to_string());
        }
    }
}

/// Key paths whose values differ, as `key: old -> new` lines.
pub fn diff(old: &serde_json::Value, new: &serde_json::Value) -> Vec<String> {
    let (mut a, mut b) = (BTreeMap::new(), BTreeMap::new());
    flatten("", old, &mut a);
    flatten("", new, &mut b);
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let absent = "(absent)".to_string();
    keys.into_iter()
        .filter(|k| a.get(*k) != b.get(*k))
        .map(|k| format!("{k}: {} -> {}", a.get(k).unwrap_or(&absent), b.get(k).unwrap_or(&absent)))
        .collect()
}
