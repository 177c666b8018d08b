//! Every artifact on disk carries a header naming its schema version, the
//! fingerprint of the configuration that produced it, and the producing
//! stage. JSON documents embed it as a field; line-oriented files start with
//! a header line.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// Prefix of the header line in CSV and plain-text artifacts.
pub const TEXT_HEADER_PREFIX: &str = "#!vcf ";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactHeader {
    pub schema_version: u32,
    pub config_fingerprint: String,
    pub stage: String,
}

impl ArtifactHeader {
    pub fn new(fingerprint: impl Into<String>, stage: impl Into<String>) -> Self {
        Self { schema_version: SCHEMA_VERSION, config_fingerprint: fingerprint.into(), stage: stage.into() }
    }

    pub fn text_line(&self) -> String {
        format!("{TEXT_HEADER_PREFIX}{}", serde_json::to_string(self).expect("header serializes"))
    }

    pub fn parse_text_line(line: &str) -> Option<Self> {
        line.strip_prefix(TEXT_HEADER_PREFIX).and_then(|j| serde_json::from_str(j).ok())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct HeaderLine {
    artifact: ArtifactHeader,
}

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {source}")]
    Json { path: PathBuf, line: usize, source: serde_json::Error },
    #[error("{0}: missing artifact header")]
    MissingHeader(PathBuf),
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> ArtifactError + '_ {
    move |source| ArtifactError::Io { path: path.to_path_buf(), source }
}

/// Writes to `path` through a temporary sibling that is renamed into place
/// on success and removed on failure.
pub fn write_atomically(
    path: &Path,
    body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), ArtifactError> {
    let io = io_err(path);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(&io)?;
    }
    let tmp = path.with_extension(format!(
        "{}.partial",
        path.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_default()
    ));
    let result = (|| {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        body(&mut w)?;
        w.flush()?;
        drop(w);
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io(e));
    }
    Ok(())
}

pub fn write_jsonl<T: Serialize>(
    path: &Path,
    header: Option<&ArtifactHeader>,
    records: &[T],
) -> Result<(), ArtifactError> {
    write_atomically(path, |w| {
        if let Some(h) = header {
            serde_json::to_writer(&mut *w, &HeaderLine { artifact: h.clone() })?;
            w.write_all(b"\n")?;
        }
        for r in records {
            serde_json::to_writer(&mut *w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

/// Reads a JSONL artifact, returning its header (if it has one) and records.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<(Option<ArtifactHeader>, Vec<T>), ArtifactError> {
    let io = io_err(path);
    let reader = BufReader::new(fs::File::open(path).map_err(&io)?);
    let mut header = None;
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(&io)?;
        if line.trim().is_empty() {
            continue;
        }
        if i == 0 {
            if let Ok(h) = serde_json::from_str::<HeaderLine>(&line) {
                header = Some(h.artifact);
                continue;
            }
        }
        records.push(
            serde_json::from_str(&line)
                .map_err(|source| ArtifactError::Json { path: path.to_path_buf(), line: i + 1, source })?,
        );
    }
    Ok((header, records))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ArtifactError> {
    write_atomically(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, ArtifactError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| ArtifactError::Json { path: path.to_path_buf(), line: 0, source })
}

/// Header of any artifact kind: a JSONL header line, a text header line, or an
/// `artifact` field of a JSON document.
pub fn read_header(path: &Path) -> Result<ArtifactHeader, ArtifactError> {
    let io = io_err(path);
    let mut first = String::new();
    BufReader::new(fs::File::open(path).map_err(&io)?).read_line(&mut first).map_err(&io)?;
    if let Some(h) = ArtifactHeader::parse_text_line(first.trim_end()) {
        return Ok(h);
    }
    if let Ok(h) = serde_json::from_str::<HeaderLine>(first.trim_end()) {
        return Ok(h.artifact);
    }
    if let Ok(doc) = read_json::<HeaderLine>(path) {
        return Ok(doc.artifact);
    }
    Err(ArtifactError::MissingHeader(path.to_path_buf()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Rec {
        a: u32,
        b: String,
    }

    #[test]
    fn jsonl_round_trip_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.jsonl");
        let h = ArtifactHeader::new("abc", "filter");
        let recs = vec![Rec { a: 1, b: "x\ny".into() }, Rec { a: 2, b: String::new() }];
        write_jsonl(&p, Some(&h), &recs).unwrap();
        let (got_h, got) = read_jsonl::<Rec>(&p).unwrap();
        assert_eq!(got_h, Some(h.clone()));
        assert_eq!(got, recs);
        assert_eq!(read_header(&p).unwrap(), h);
        assert!(!dir.path().join("x.jsonl.partial").exists());
    }

    #[test]
    fn headers_in_text_and_json_documents() {
        let dir = tempfile::tempdir().unwrap();
        let h = ArtifactHeader::new("f", "export");
        let t = dir.path().join("c.txt");
        fs::write(&t, format!("{}\na b\n", h.text_line())).unwrap();
        assert_eq!(read_header(&t).unwrap(), h);
        let j = dir.path().join("m.json");
        write_json(&j, &serde_json::json!({"x": 1, "artifact": h})).unwrap();
        assert_eq!(read_header(&j).unwrap(), h);
        let bare = dir.path().join("b.txt");
        fs::write(&bare, "nothing").unwrap();
        assert!(matches!(read_header(&bare), Err(ArtifactError::MissingHeader(_))));
    }

    #[test]
    fn failed_write_leaves_no_partial_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("y.jsonl");
        let r = write_atomically(&p, |w| {
            w.write_all(b"half")?;
            Err(std::io::Error::other("disk full"))
        });
        assert!(r.is_err());
        assert!(!p.exists());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
