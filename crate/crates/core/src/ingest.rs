//! Repository discovery, license admission, and collection of candidate
//! Verilog files from repository snapshots.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use walkdir::WalkDir;

use crate::audit::AuditEntry;

pub const DEFAULT_EXTENSIONS: &[&str] = &["v", "sv", "vh", "svh"];
pub const DEFAULT_LICENSE_ALLOWLIST: &[&str] =
    &["mit", "apache-2.0", "bsd-2-clause", "bsd-3-clause", "isc", "unlicense", "0bsd", "zlib"];
pub const REPOS_FILE: &str = "repos.jsonl";
pub const NO_LICENSE: &str = "none";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("snapshot directory {0} does not exist or is not a directory")]
    MissingSnapshot(PathBuf),
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: malformed repository record: {source}")]
    BadRecord { path: PathBuf, line: usize, source: serde_json::Error },
    #[error("duplicate repository id {0}")]
    DuplicateRepo(String),
    #[error("license allowlist is empty")]
    EmptyAllowlist,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoRecord {
    /// `host/owner/name`.
    pub repo_id: String,
    pub url: String,
    pub license_id: String,
    pub stars: u64,
    /// Snapshot directory, relative to the corpus root.
    pub snapshot_path: String,
    #[serde(default)]
    pub fork: bool,
}

impl RepoRecord {
    /// `owner__name`, the directory name used in the offline layout.
    pub fn snapshot_dir_name(owner: &str, name: &str) -> String {
        format!("{owner}__{name}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFile {
    pub file_id: String,
    pub repo_id: String,
    pub relative_path: String,
    pub content: String,
    pub byte_size: u64,
    pub extension: String,
}

impl SourceFile {
    pub fn new(repo_id: &str, relative_path: &str, content: String, byte_size: u64) -> Self {
        let extension = Path::new(relative_path)
            .extension()
            .map(|e| e.to_string_lossy().to_lowercase())
            .unwrap_or_default();
        Self {
            file_id: file_id(repo_id, relative_path, &content),
            repo_id: repo_id.to_string(),
            relative_path: relative_path.to_string(),
            content,
            byte_size,
            extension,
        }
    }
}

/// CRLF and lone CR become LF.
pub fn normalize_newlines(text: &str) -> String {
    text.replace("\r\n", "\n").replace('\r', "\n")
}

/// 16 hex digits of the SHA-256 of the newline-normalized content.
pub fn content_hash(content: &str) -> String {
    let digest = Sha256::digest(normalize_newlines(content).as_bytes());
    hex::encode(&digest[..8])
}

/// `<content hash>-<location hash>`: files with identical contents share the
/// first component, while the second keeps ids unique across locations.
pub fn file_id(repo_id: &str, relative_path: &str, content: &str) -> String {
    let loc = Sha256::digest(format!("{repo_id}/{relative_path}").as_bytes());
    format!("{}-{}", content_hash(content), hex::encode(&loc[..4]))
}

/// Lowercased license key; missing becomes `none`.
pub fn normalize_license(key: Option<&str>) -> String {
    match key.map(str::trim) {
        None | Some("") => NO_LICENSE.to_string(),
        Some(k) => k.to_lowercase(),
    }
}

pub fn normalize_extensions<I, S>(exts: I) -> BTreeSet<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    exts.into_iter().map(|e| e.as_ref().trim_start_matches('.').to_lowercase()).collect()
}

/// Keeps repositories whose license is on the allowlist. `none` and `other`
/// are never admitted.
pub fn filter_permissive(
    repos: &[RepoRecord],
    allowlist: &BTreeSet<String>,
) -> Result<Vec<RepoRecord>, IngestError> {
    if allowlist.is_empty() {
        return Err(IngestError::EmptyAllowlist);
    }
    Ok(repos
        .iter()
        .filter(|r| r.license_id != NO_LICENSE && r.license_id != "other")
        .filter(|r| allowlist.contains(&r.license_id))
        .cloned()
        .collect())
}

#[derive(Debug, Default)]
pub struct CollectOutcome {
    pub files: Vec<SourceFile>,
    pub audit: Vec<AuditEntry>,
}

/// Recursively collects files with a configured extension. Symlinks are
/// skipped and output is sorted by relative path.
pub fn collect_files(
    repo_id: &str,
    snapshot: &Path,
    extensions: &BTreeSet<String>,
) -> Result<CollectOutcome, IngestError> {
    if !snapshot.is_dir() {
        return Err(IngestError::MissingSnapshot(snapshot.to_path_buf()));
    }
    let mut out = CollectOutcome::default();
    let mut found: Vec<(String, PathBuf)> = Vec::new();
    for entry in WalkDir::new(snapshot).follow_links(false) {
        let entry = match entry {
            Ok(e) => e,
            Err(err) => {
                let subject = err.path().map(|p| p.display().to_string()).unwrap_or_default();
                out.audit.push(AuditEntry::new("ingest", subject, "unreadable", err.to_string()));
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let ext = entry.path().extension().map(|e| e.to_string_lossy().to_lowercase());
        if !ext.is_some_and(|e| extensions.contains(&e)) {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(snapshot)
            .expect("walkdir yields children of its root")
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/");
        found.push((rel, entry.into_path()));
    }
    found.sort();
    for (rel, path) in found {
        match fs::read(&path) {
            Ok(bytes) => {
                let size = bytes.len() as u64;
                let content = String::from_utf8_lossy(&bytes).into_owned();
                out.files.push(SourceFile::new(repo_id, &rel, content, size));
            }
            Err(err) => {
                out.audit.push(AuditEntry::new("ingest", format!("{repo_id}/{rel}"), "unreadable", err.to_string()));
            }
        }
    }
    Ok(out)
}

pub fn read_repos_jsonl(path: &Path) -> Result<Vec<RepoRecord>, IngestError> {
    let io = |source| IngestError::Io { path: path.to_path_buf(), source };
    let reader = BufReader::new(fs::File::open(path).map_err(io)?);
    let mut repos = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RepoRecord = serde_json::from_str(&line)
            .map_err(|source| IngestError::BadRecord { path: path.to_path_buf(), line: i + 1, source })?;
        if !seen.insert(rec.repo_id.clone()) {
            return Err(IngestError::DuplicateRepo(rec.repo_id));
        }
        repos.push(rec);
    }
    Ok(repos)
}

pub fn write_repos_jsonl(path: &Path, repos: &[RepoRecord]) -> Result<(), IngestError> {
    let io = |source| IngestError::Io { path: path.to_path_buf(), source };
    let mut f = fs::File::create(path).map_err(io)?;
    for r in repos {
        let line = serde_json::to_string(r).expect("record serializes");
        writeln!(f, "{line}").map_err(io)?;
    }
    Ok(())
}

#[derive(Debug, Default)]
pub struct OfflineCorpus {
    /// Every repository listed in `repos.jsonl`, sorted by id.
    pub repos: Vec<RepoRecord>,
    /// Repositories that passed the license allowlist.
    pub admitted: Vec<RepoRecord>,
    pub files: Vec<SourceFile>,
    pub audit: Vec<AuditEntry>,
}

/// Reads an offline corpus: `<root>/repos.jsonl` plus one `<owner>__<name>/`
/// snapshot directory per repository.
pub fn ingest_offline(
    root: &Path,
    extensions: &BTreeSet<String>,
    allowlist: &BTreeSet<String>,
) -> Result<OfflineCorpus, IngestError> {
    let mut repos = read_repos_jsonl(&root.join(REPOS_FILE))?;
    repos.sort_by(|a, b| a.repo_id.cmp(&b.repo_id));
    let admitted = filter_permissive(&repos, allowlist)?;
    let mut out = OfflineCorpus { repos, ..Default::default() };
    for repo in &admitted {
        let dir = root.join(&repo.snapshot_path);
        match collect_files(&repo.repo_id, &dir, extensions) {
            Ok(c) => {
                out.files.extend(c.files);
                out.audit.extend(c.audit);
            }
            Err(IngestError::MissingSnapshot(p)) => out.audit.push(AuditEntry::new(
                "ingest",
                repo.repo_id.clone(),
                "missing_snapshot",
                p.display().to_string(),
            )),
            Err(e) => return Err(e),
        }
    }
    out.admitted = admitted;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Online discovery

/// One repository as reported by the hosting service's search endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepoHit {
    /// `owner/name`.
    pub full_name: String,
    pub html_url: String,
    pub stars: u64,
    pub license_key: Option<String>,
    pub fork: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SearchPage {
    pub hits: Vec<RepoHit>,
    pub next_page: Option<String>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ApiError {
    #[error("transient failure: {0}")]
    Transient(String),
    #[error("rate limited")]
    RateLimited { retry_after: Option<Duration> },
    #[error("authentication failed: {0}")]
    Auth(String),
}

/// Search interface of a repository-hosting service.
pub trait RepoSearch {
    /// `page` is the token returned as `next_page` by the previous call, or
    /// `None` for the first page.
    fn search(&mut self, language: &str, page: Option<&str>) -> Result<SearchPage, ApiError>;

    /// License key for a repository whose search hit carried none.
    fn license(&mut self, _full_name: &str) -> Result<Option<String>, ApiError> {
        Ok(None)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscoveryQuery {
    pub host: String,
    pub languages: Vec<String>,
    /// Maximum number of records; 0 means nothing is fetched.
    pub cap: usize,
    pub exclude_forks: bool,
    pub max_retries: u32,
    pub base_backoff_ms: u64,
}

impl Default for DiscoveryQuery {
    fn default() -> Self {
        Self {
            host: "github.com".into(),
            languages: vec!["Verilog".into(), "SystemVerilog".into()],
            cap: 1000,
            exclude_forks: true,
            max_retries: 5,
            base_backoff_ms: 1000,
        }
    }
}

#[derive(Debug, Error)]
pub enum DiscoverError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("discovery stopped after {} records: {source}", records.len())]
    Partial { records: Vec<RepoRecord>, source: ApiError },
}

fn with_retries<T>(
    query: &DiscoveryQuery,
    sleep: &mut dyn FnMut(Duration),
    mut call: impl FnMut() -> Result<T, ApiError>,
) -> Result<T, ApiError> {
    let mut attempt = 0u32;
    loop {
        match call() {
            Ok(v) => return Ok(v),
            Err(ApiError::Auth(m)) => return Err(ApiError::Auth(m)),
            Err(e) if attempt >= query.max_retries => return Err(e),
            Err(e) => {
                let backoff = Duration::from_millis(query.base_backoff_ms.saturating_mul(1 << attempt.min(16)));
                let wait = match e {
                    ApiError::RateLimited { retry_after: Some(d) } => d.max(backoff),
                    _ => backoff,
                };
                tracing::warn!(attempt, wait_ms = wait.as_millis() as u64, error = %e, "retrying discovery call");
                sleep(wait);
                attempt += 1;
            }
        }
    }
}

/// Pages through the search endpoint for every language tag, deduplicating by
/// repository id. Results are sorted by repository id.
pub fn discover_repos(
    api: &mut dyn RepoSearch,
    query: &DiscoveryQuery,
    sleep: &mut dyn FnMut(Duration),
) -> Result<Vec<RepoRecord>, DiscoverError> {
    let mut found: BTreeMap<String, RepoRecord> = BTreeMap::new();
    let finish = |found: BTreeMap<String, RepoRecord>| found.into_values().collect::<Vec<_>>();
    if query.cap == 0 {
        return Ok(Vec::new());
    }
    'languages: for lang in &query.languages {
        let mut page: Option<String> = None;
        loop {
            let result = with_retries(query, sleep, || api.search(lang, page.as_deref()));
            let batch = match result {
                Ok(b) => b,
                Err(ApiError::Auth(m)) => return Err(DiscoverError::Auth(m)),
                Err(source) => return Err(DiscoverError::Partial { records: finish(found), source }),
            };
            for hit in batch.hits {
                if query.exclude_forks && hit.fork {
                    continue;
                }
                let repo_id = format!("{}/{}", query.host, hit.full_name).to_lowercase();
                if found.contains_key(&repo_id) {
                    continue;
                }
                let license = match hit.license_key.clone() {
                    Some(k) => Some(k),
                    None => match with_retries(query, sleep, || api.license(&hit.full_name)) {
                        Ok(k) => k,
                        Err(ApiError::Auth(m)) => return Err(DiscoverError::Auth(m)),
                        Err(source) => return Err(DiscoverError::Partial { records: finish(found), source }),
                    },
                };
                let (owner, name) = hit.full_name.split_once('/').unwrap_or(("", &hit.full_name));
                found.insert(
                    repo_id.clone(),
                    RepoRecord {
                        repo_id,
                        url: hit.html_url,
                        license_id: normalize_license(license.as_deref()),
                        stars: hit.stars,
                        snapshot_path: RepoRecord::snapshot_dir_name(owner, name),
                        fork: hit.fork,
                    },
                );
                if found.len() >= query.cap {
                    break 'languages;
                }
            }
            match batch.next_page {
                Some(next) => page = Some(next),
                None => break,
            }
        }
    }
    Ok(finish(found))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::VecDeque;

    fn repo(id: &str, license: &str) -> RepoRecord {
        RepoRecord {
            repo_id: id.into(),
            url: format!("https://{id}"),
            license_id: license.into(),
            stars: 1,
            snapshot_path: id.replace('/', "__"),
            fork: false,
        }
    }

    fn allow() -> BTreeSet<String> {
        ["mit", "apache-2.0", "bsd-3-clause"].into_iter().map(String::from).collect()
    }

    #[test]
    fn permissive_filter() {
        let repos = vec![repo("a", "mit"), repo("b", "none"), repo("c", "gpl-3.0"), repo("d", "other")];
        let kept = filter_permissive(&repos, &allow()).unwrap();
        assert_eq!(kept.iter().map(|r| r.repo_id.as_str()).collect::<Vec<_>>(), ["a"]);
        assert!(filter_permissive(&[], &allow()).unwrap().is_empty());
        assert!(matches!(filter_permissive(&repos, &BTreeSet::new()), Err(IngestError::EmptyAllowlist)));
    }

    #[test]
    fn license_normalization() {
        assert_eq!(normalize_license(Some("MIT")), "mit");
        assert_eq!(normalize_license(None), "none");
        assert_eq!(normalize_license(Some("  ")), "none");
    }

    #[test]
    fn file_ids_share_content_component() {
        let a = file_id("r1", "a.v", "wire w;\r\n");
        let b = file_id("r2", "b.v", "wire w;\n");
        assert_ne!(a, b);
        assert_eq!(a.split('-').next(), b.split('-').next());
        assert_eq!(a, file_id("r1", "a.v", "wire w;\r\n"));
    }

    #[test]
    fn collect_filters_extensions_and_sorts() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["d.vh", "b.sv", "c.py", "a.v", "sub/E.V"] {
            let p = dir.path().join(name);
            fs::create_dir_all(p.parent().unwrap()).unwrap();
            fs::write(p, "module m; endmodule\n").unwrap();
        }
        let exts = normalize_extensions(DEFAULT_EXTENSIONS);
        let out = collect_files("r", dir.path(), &exts).unwrap();
        let names: Vec<_> = out.files.iter().map(|f| f.relative_path.as_str()).collect();
        assert_eq!(names, ["a.v", "b.sv", "d.vh", "sub/E.V"]);
        assert_eq!(out.files[3].extension, "v");
        let again = collect_files("r", dir.path(), &exts).unwrap();
        assert_eq!(out.files, again.files);
    }

    #[test]
    fn collect_on_empty_and_missing_dirs() {
        let dir = tempfile::tempdir().unwrap();
        let exts = normalize_extensions(DEFAULT_EXTENSIONS);
        assert!(collect_files("r", dir.path(), &exts).unwrap().files.is_empty());
        assert!(matches!(
            collect_files("r", &dir.path().join("nope"), &exts),
            Err(IngestError::MissingSnapshot(_))
        ));
    }

    #[cfg(unix)]
    #[test]
    fn symlinks_are_not_followed() {
        let dir = tempfile::tempdir().unwrap();
        let outside = tempfile::tempdir().unwrap();
        fs::write(outside.path().join("x.v"), "wire w;").unwrap();
        std::os::unix::fs::symlink(outside.path(), dir.path().join("link")).unwrap();
        std::os::unix::fs::symlink(outside.path().join("x.v"), dir.path().join("y.v")).unwrap();
        let out = collect_files("r", dir.path(), &normalize_extensions(DEFAULT_EXTENSIONS)).unwrap();
        assert!(out.files.is_empty());
    }

    struct MockApi {
        pages: BTreeMap<String, Vec<Vec<RepoHit>>>,
        failures: VecDeque<ApiError>,
        calls: usize,
    }

    impl RepoSearch for MockApi {
        fn search(&mut self, language: &str, page: Option<&str>) -> Result<SearchPage, ApiError> {
            self.calls += 1;
            if let Some(e) = self.failures.pop_front() {
                return Err(e);
            }
            let pages = &self.pages[language];
            let idx: usize = page.map_or(0, |p| p.parse().unwrap());
            let next = (idx + 1 < pages.len()).then(|| (idx + 1).to_string());
            Ok(SearchPage { hits: pages[idx].clone(), next_page: next })
        }

        fn license(&mut self, _full_name: &str) -> Result<Option<String>, ApiError> {
            Ok(Some("MIT".into()))
        }
    }

    fn hits(prefix: &str, n: usize) -> Vec<RepoHit> {
        (0..n)
            .map(|i| RepoHit {
                full_name: format!("{prefix}/r{i}"),
                html_url: format!("https://github.com/{prefix}/r{i}"),
                stars: i as u64,
                license_key: (i % 2 == 0).then(|| "apache-2.0".into()),
                fork: false,
            })
            .collect()
    }

    fn api(pages: Vec<(&str, Vec<Vec<RepoHit>>)>) -> MockApi {
        MockApi {
            pages: pages.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            failures: VecDeque::new(),
            calls: 0,
        }
    }

    fn no_sleep() -> impl FnMut(Duration) {
        |_| {}
    }

    #[test]
    fn zero_cap_fetches_nothing() {
        let mut a = api(vec![("Verilog", vec![hits("o", 3)])]);
        let q = DiscoveryQuery { cap: 0, ..Default::default() };
        assert!(discover_repos(&mut a, &q, &mut no_sleep()).unwrap().is_empty());
        assert_eq!(a.calls, 0);
    }

    #[test]
    fn paginates_to_exhaustion() {
        let mut a = api(vec![
            ("Verilog", vec![hits("p0", 100), hits("p1", 100)]),
            ("SystemVerilog", vec![vec![]]),
        ]);
        let q = DiscoveryQuery::default();
        let repos = discover_repos(&mut a, &q, &mut no_sleep()).unwrap();
        assert_eq!(repos.len(), 200);
        assert!(repos.iter().all(|r| r.license_id == "mit" || r.license_id == "apache-2.0"));
        assert_eq!(repos[0].snapshot_path, "p0__r0");
    }

    #[test]
    fn repo_under_both_languages_is_recorded_once() {
        let mut a = api(vec![("Verilog", vec![hits("o", 1)]), ("SystemVerilog", vec![hits("o", 1)])]);
        let repos = discover_repos(&mut a, &DiscoveryQuery::default(), &mut no_sleep()).unwrap();
        assert_eq!(repos.len(), 1);
        assert_eq!(repos[0].repo_id, "github.com/o/r0");
    }

    #[test]
    fn forks_are_excluded_by_default() {
        let mut h = hits("o", 2);
        h[1].fork = true;
        let mut a = api(vec![("Verilog", vec![h.clone()]), ("SystemVerilog", vec![vec![]])]);
        assert_eq!(discover_repos(&mut a, &DiscoveryQuery::default(), &mut no_sleep()).unwrap().len(), 1);
        let mut a = api(vec![("Verilog", vec![h]), ("SystemVerilog", vec![vec![]])]);
        let q = DiscoveryQuery { exclude_forks: false, ..Default::default() };
        assert_eq!(discover_repos(&mut a, &q, &mut no_sleep()).unwrap().len(), 2);
    }

    #[test]
    fn transient_failures_back_off_exponentially() {
        let mut a = api(vec![("Verilog", vec![hits("o", 2)]), ("SystemVerilog", vec![vec![]])]);
        a.failures = VecDeque::from([ApiError::Transient("x".into()), ApiError::Transient("y".into())]);
        let mut waits = Vec::new();
        let q = DiscoveryQuery { base_backoff_ms: 10, ..Default::default() };
        let repos = discover_repos(&mut a, &q, &mut |d| waits.push(d)).unwrap();
        assert_eq!(repos.len(), 2);
        assert_eq!(waits, [Duration::from_millis(10), Duration::from_millis(20)]);
    }

    #[test]
    fn exhausted_retries_return_partial_results() {
        let mut a = api(vec![("Verilog", vec![hits("o", 3)]), ("SystemVerilog", vec![hits("s", 1)])]);
        let q = DiscoveryQuery { max_retries: 1, ..Default::default() };
        // First language succeeds, then the failures start.
        let first = discover_repos(&mut a, &DiscoveryQuery { languages: vec!["Verilog".into()], ..q.clone() }, &mut no_sleep()).unwrap();
        assert_eq!(first.len(), 3);
        a.failures = VecDeque::from(vec![ApiError::Transient("down".into()); 10]);
        match discover_repos(&mut a, &q, &mut no_sleep()) {
            Err(DiscoverError::Partial { records, .. }) => assert!(records.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn auth_failure_is_fatal_without_retry() {
        let mut a = api(vec![("Verilog", vec![hits("o", 3)])]);
        a.failures = VecDeque::from([ApiError::Auth("bad token".into())]);
        let mut slept = 0;
        let r = discover_repos(&mut a, &DiscoveryQuery::default(), &mut |_| slept += 1);
        assert!(matches!(r, Err(DiscoverError::Auth(_))));
        assert_eq!(slept, 0);
        assert_eq!(a.calls, 1);
    }

    #[test]
    fn offline_layout_round_trip() {
        let root = tempfile::tempdir().unwrap();
        let repos = vec![repo("github.com/o/a", "mit"), repo("github.com/o/b", "gpl-3.0")];
        write_repos_jsonl(&root.path().join(REPOS_FILE), &repos).unwrap();
        for r in &repos {
            let d = root.path().join(&r.snapshot_path);
            fs::create_dir_all(&d).unwrap();
            fs::write(d.join("top.v"), "module top; endmodule\n").unwrap();
        }
        let c = ingest_offline(root.path(), &normalize_extensions(DEFAULT_EXTENSIONS), &allow()).unwrap();
        assert_eq!(c.repos.len(), 2);
        assert_eq!(c.admitted.len(), 1);
        assert_eq!(c.files.len(), 1);
        // Same content collected directly yields an identical record.
        let direct = collect_files("github.com/o/a", &root.path().join("github.com__o__a"), &normalize_extensions(DEFAULT_EXTENSIONS)).unwrap();
        assert_eq!(direct.files, c.files);
    }
}
