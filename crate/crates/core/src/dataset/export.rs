//! Subset export as JSONL, CSV, or fixed-length token chunks.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DatasetError, DatasetManifest, Unit};
use crate::artifact::{self, ArtifactHeader};
use crate::extract::{Snippet, SnippetKind};
use crate::ingest::SourceFile;
use crate::lexer::{self, Lexer, SEPARATOR};

pub const CHUNK_SIZE: usize = 512;

/// One exported unit. Every field is text; fields that do not apply to the
/// unit kind are empty, which keeps JSONL and CSV forms interchangeable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportRecord {
    pub id: String,
    pub unit: String,
    pub file_id: String,
    pub repo_id: String,
    pub path: String,
    pub split: String,
    pub kind: String,
    pub name: String,
    pub definition: String,
    pub body: String,
    pub text: String,
}

const CSV_COLUMNS: [&str; 11] =
    ["id", "unit", "file_id", "repo_id", "path", "split", "kind", "name", "definition", "body", "text"];

/// Texts the records are built from.
#[derive(Debug, Clone, Default)]
pub struct UnitSource {
    pub files: BTreeMap<String, SourceFile>,
    pub snippets: BTreeMap<String, Snippet>,
}

impl UnitSource {
    pub fn new(files: impl IntoIterator<Item = SourceFile>, snippets: impl IntoIterator<Item = Snippet>) -> Self {
        Self {
            files: files.into_iter().map(|f| (f.file_id.clone(), f)).collect(),
            snippets: snippets.into_iter().map(|s| (s.snippet_id.clone(), s)).collect(),
        }
    }
}

/// Records for `ids` in the order given.
pub fn build_records(
    manifest: &DatasetManifest,
    unit: Unit,
    ids: &[String],
    source: &UnitSource,
) -> Result<Vec<ExportRecord>, DatasetError> {
    let missing = |id: &str| DatasetError::MissingUnit(id.to_string());
    let split_of = |file_id: &str| manifest.file(file_id).map(|f| f.split.as_str().to_string()).unwrap_or_default();
    ids.iter()
        .map(|id| match unit {
            Unit::File => {
                let f = source.files.get(id).ok_or_else(|| missing(id))?;
                Ok(ExportRecord {
                    id: id.clone(),
                    unit: unit.as_str().into(),
                    file_id: f.file_id.clone(),
                    repo_id: f.repo_id.clone(),
                    path: f.relative_path.clone(),
                    split: split_of(&f.file_id),
                    kind: String::new(),
                    name: String::new(),
                    definition: String::new(),
                    body: String::new(),
                    text: f.content.clone(),
                })
            }
            Unit::Snippet => {
                let s = source.snippets.get(id).ok_or_else(|| missing(id))?;
                let f = source.files.get(&s.file_id).ok_or_else(|| missing(&s.file_id))?;
                Ok(ExportRecord {
                    id: id.clone(),
                    unit: unit.as_str().into(),
                    file_id: s.file_id.clone(),
                    repo_id: f.repo_id.clone(),
                    path: f.relative_path.clone(),
                    split: split_of(&s.file_id),
                    kind: match s.kind {
                        SnippetKind::Module => "module".into(),
                        SnippetKind::Function => "function".into(),
                    },
                    name: s.name.clone(),
                    definition: s.definition_text.clone(),
                    body: s.body_text.clone(),
                    text: format!("{}{}", s.definition_text, s.body_text),
                })
            }
        })
        .collect()
}

pub fn write_csv(path: &Path, header: Option<&ArtifactHeader>, records: &[ExportRecord]) -> Result<(), DatasetError> {
    artifact::write_atomically(path, |w| {
        if let Some(h) = header {
            writeln!(w, "{}", h.text_line())?;
        }
        let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        csv.write_record(CSV_COLUMNS)?;
        for r in records {
            csv.serialize(r)?;
        }
        csv.flush()
    })?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<(Option<ArtifactHeader>, Vec<ExportRecord>), DatasetError> {
    let text = std::fs::read_to_string(path)?;
    let (header, body) = match text.split_once('\n') {
        Some((first, rest)) if ArtifactHeader::parse_text_line(first).is_some() => {
            (ArtifactHeader::parse_text_line(first), rest)
        }
        _ => (None, text.as_str()),
    };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let records = reader.deserialize().collect::<Result<Vec<ExportRecord>, _>>()?;
    Ok((header, records))
}

/// Makes a token safe to write on a space-separated chunk line: string
/// literals cut off by a newline or end of input are closed, and escaped
/// line breaks become `\n`/`\r` escapes.
pub fn sanitize_chunk_token(token: &str) -> String {
    if !token.starts_with('"') {
        return token.to_string();
    }
    let mut t = token.replace('\n', "n").replace('\r', "r");
    let closed = t.len() >= 2 && t.ends_with('"') && {
        let inner = &t[..t.len() - 1];
        (inner.len() - inner.trim_end_matches('\\').len()) % 2 == 0
    };
    if !closed {
        let trailing = t.len() - t.trim_end_matches('\\').len();
        if trailing % 2 == 1 {
            t.push('\\');
        }
        t.push('"');
    }
    t
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkMeta {
    pub chunk_size: usize,
    pub unit_count: usize,
    /// Unit tokens plus one separator per unit, before padding.
    pub token_count: usize,
    pub chunk_count: usize,
    pub padding: usize,
    pub last_chunk_padded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkSet {
    pub chunks: Vec<Vec<String>>,
    pub meta: ChunkMeta,
}

/// Concatenates each text's tokens followed by a separator and cuts the
/// stream into chunks of exactly `size` tokens, padding the last one with
/// separators.
pub fn chunk_units<'a>(texts: impl IntoIterator<Item = &'a str>, size: usize) -> ChunkSet {
    assert!(size > 0, "chunk size must be positive");
    let mut stream = Vec::new();
    let mut units = 0;
    for text in texts {
        units += 1;
        stream.extend(lexer::tokenize(text).iter().map(|t| sanitize_chunk_token(t)));
        stream.push(SEPARATOR.to_string());
    }
    let token_count = stream.len();
    let chunk_count = token_count.div_ceil(size);
    let padding = chunk_count * size - token_count;
    stream.resize(chunk_count * size, SEPARATOR.to_string());
    let chunks = stream.chunks(size).map(<[String]>::to_vec).collect();
    ChunkSet {
        chunks,
        meta: ChunkMeta {
            chunk_size: size,
            unit_count: units,
            token_count,
            chunk_count,
            padding,
            last_chunk_padded: padding > 0,
        },
    }
}

pub fn write_chunks(path: &Path, header: Option<&ArtifactHeader>, set: &ChunkSet) -> Result<(), DatasetError> {
    artifact::write_atomically(path, |w| {
        if let Some(h) = header {
            writeln!(w, "{}", h.text_line())?;
        }
        for c in &set.chunks {
            writeln!(w, "{}", c.join(" "))?;
        }
        Ok(())
    })?;
    Ok(())
}

/// Re-lexes a chunk file, one token list per chunk line.
pub fn read_chunks(text: &str) -> Vec<Vec<String>> {
    let lexer = Lexer::default().recognizing_separator();
    text.lines()
        .filter(|l| ArtifactHeader::parse_text_line(l).is_none())
        .map(|l| lexer.lex(l).token_texts())
        .collect()
}
