//! `mine`: discover repositories, then snapshot them into the offline layout
//! that `ingest` reads.

use std::path::Path;
use std::process::{Command, Stdio};

use vcf_core::artifact;
use vcf_core::audit::AuditEntry;
use vcf_core::ingest::{self, discover_repos, DiscoverError, RepoRecord, REPOS_FILE};

use crate::error::{invalid, runtime, CliError, CliResult};
use crate::github::GitHubClient;
use crate::stages::Pipeline;

pub const MINE_REPOS: &str = "mine/repos.jsonl";
pub const MINE_AUDIT: &str = "mine/audit.jsonl";

/// Shallow clone of `url` into `dest`; existing snapshots are kept.
fn clone_repo(url: &str, dest: &Path) -> Result<(), String> {
    if dest.is_dir() {
        return Ok(());
    }
    let status = Command::new("git")
        .args(["clone", "--depth", "1", "--quiet", url])
        .arg(dest)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .status()
        .map_err(|e| format!("running git: {e}"))?;
    if status.success() {
        Ok(())
    } else {
        Err(format!("git clone exited with {status}"))
    }
}

pub fn mine(p: &Pipeline, clone: bool) -> CliResult<()> {
    let root = &p.cfg.ingest.offline_root;
    if root.is_empty() {
        return Err(invalid("ingest.offline_root is not set"));
    }
    let root = Path::new(root);
    std::fs::create_dir_all(root).map_err(runtime)?;
    let mut client = GitHubClient::from_env().map_err(runtime)?;
    let mut sleep = |d| std::thread::sleep(d);
    let (repos, failure): (Vec<RepoRecord>, Option<CliError>) =
        match discover_repos(&mut client, &p.cfg.discovery_query(), &mut sleep) {
            Ok(r) => (r, None),
            Err(DiscoverError::Auth(m)) => return Err(invalid(format!("authentication failed: {m}"))),
            Err(DiscoverError::Partial { records, source }) => {
                let msg = format!("discovery stopped after {} repositories: {source}", records.len());
                (records, Some(CliError::Runtime(msg)))
            }
        };
    let mut audit = Vec::new();
    if clone {
        for r in &repos {
            if let Err(e) = clone_repo(&r.url, &root.join(&r.snapshot_path)) {
                tracing::warn!(repo = %r.repo_id, error = %e, "snapshot failed");
                audit.push(AuditEntry::new("mine", &r.repo_id, "snapshot_failed", e));
            }
        }
    }
    ingest::write_repos_jsonl(&root.join(REPOS_FILE), &repos).map_err(runtime)?;
    let header = artifact::ArtifactHeader::new(p.fingerprint.clone(), "mine");
    artifact::write_jsonl(&p.path(MINE_REPOS), Some(&header), &repos).map_err(runtime)?;
    artifact::write_jsonl(&p.path(MINE_AUDIT), Some(&header), &audit).map_err(runtime)?;
    tracing::info!(stage = "mine", repos = repos.len(), snapshot_failures = audit.len(), "stage finished");
    failure.map_or(Ok(()), Err)
}
