//! Parsability tagging with external parsers and an internal structural
//! fallback.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DatasetError, DatasetManifest};
use crate::audit::AuditEntry;
use crate::extract::is_prototype;
use crate::ingest::SourceFile;
use crate::lexer::{self, Token, TokenKind};

pub const INTERNAL_CHECKER: &str = "internal";

/// One parser invocation template; `{file}` in any argument is replaced by
/// the path of the file under test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParserCommand {
    pub name: String,
    pub argv: Vec<String>,
}

impl ParserCommand {
    pub fn new(name: &str, argv: &[&str]) -> Self {
        Self { name: name.to_string(), argv: argv.iter().map(|s| s.to_string()).collect() }
    }

    pub fn program(&self) -> &str {
        self.argv.first().map(String::as_str).unwrap_or("")
    }

    pub fn render(&self, file: &Path) -> Vec<String> {
        let f = file.to_string_lossy();
        self.argv.iter().map(|a| a.replace("{file}", &f)).collect()
    }
}

pub trait CommandRunner: Sync {
    fn available(&self, program: &str) -> bool;
    /// Whether the command exited with status 0.
    fn run(&self, argv: &[String]) -> std::io::Result<bool>;
}

/// Runs commands as child processes with output discarded.
#[derive(Debug, Default, Clone, Copy)]
pub struct SystemRunner;

impl CommandRunner for SystemRunner {
    fn available(&self, program: &str) -> bool {
        if program.is_empty() {
            return false;
        }
        if program.contains(std::path::MAIN_SEPARATOR) {
            return Path::new(program).is_file();
        }
        std::env::var_os("PATH")
            .map(|paths| std::env::split_paths(&paths).any(|d| d.join(program).is_file()))
            .unwrap_or(false)
    }

    fn run(&self, argv: &[String]) -> std::io::Result<bool> {
        let (prog, args) = argv.split_first().ok_or_else(|| std::io::Error::other("empty command"))?;
        let status = Command::new(prog)
            .args(args)
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()?;
        Ok(status.success())
    }
}

/// Parsability results keyed by file_id, valid for one checker description.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseCache {
    pub checker: String,
    pub results: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub checker: String,
    pub invocations: usize,
    pub cache_hits: usize,
    pub audit: Vec<AuditEntry>,
}

fn opener(t: &Token, tokens: &[Token], i: usize) -> Option<&'static str> {
    if t.kind == TokenKind::Punctuation || t.kind == TokenKind::Operator {
        return match t.text.as_str() {
            "(" => Some(")"),
            "[" => Some("]"),
            "{" => Some("}"),
            _ => None,
        };
    }
    if t.kind != TokenKind::Keyword {
        return None;
    }
    let prev_is = |w: &str| i > 0 && tokens[i - 1].is_keyword(w);
    match t.text.as_str() {
        "begin" => Some("end"),
        "module" | "macromodule" => Some("endmodule"),
        "function" if !is_prototype(tokens, i) => Some("endfunction"),
        "task" if !is_prototype(tokens, i) => Some("endtask"),
        "case" | "casex" | "casez" | "randcase" => Some("endcase"),
        "fork" => Some("join"),
        "generate" => Some("endgenerate"),
        "class" if !prev_is("typedef") => Some("endclass"),
        "package" => Some("endpackage"),
        "interface" if !prev_is("virtual") => Some("endinterface"),
        "program" => Some("endprogram"),
        "specify" => Some("endspecify"),
        "primitive" => Some("endprimitive"),
        "table" => Some("endtable"),
        _ => None,
    }
}

fn is_closer(t: &Token) -> bool {
    match t.kind {
        TokenKind::Punctuation | TokenKind::Operator => matches!(t.text.as_str(), ")" | "]" | "}"),
        TokenKind::Keyword => matches!(
            t.text.as_str(),
            "end"
                | "endmodule"
                | "endfunction"
                | "endtask"
                | "endcase"
                | "join"
                | "join_any"
                | "join_none"
                | "endgenerate"
                | "endclass"
                | "endpackage"
                | "endinterface"
                | "endprogram"
                | "endspecify"
                | "endprimitive"
                | "endtable"
        ),
        _ => false,
    }
}

/// Whether brackets and block keyword pairs nest properly.
pub fn balanced(tokens: &[Token]) -> bool {
    let mut stack: Vec<&'static str> = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        if let Some(close) = opener(t, tokens, i) {
            stack.push(close);
        } else if is_closer(t) {
            let want = match t.text.as_str() {
                "join_any" | "join_none" => "join",
                other => other,
            };
            if stack.pop() != Some(want) {
                return false;
            }
        }
    }
    stack.is_empty()
}

/// Lexes without warnings and all pairs balance.
pub fn internal_check(content: &str) -> bool {
    let lex = lexer::lex(content);
    lex.is_clean() && balanced(&lex.tokens)
}

fn run_external(
    file: &SourceFile,
    commands: &[&ParserCommand],
    runner: &dyn CommandRunner,
    scratch: &Path,
    invocations: &AtomicUsize,
) -> std::io::Result<bool> {
    let ext = if file.extension.is_empty() { "v" } else { file.extension.as_str() };
    let path = scratch.join(format!("{}.{ext}", file.file_id));
    std::fs::write(&path, &file.content)?;
    let mut ok = false;
    for cmd in commands {
        invocations.fetch_add(1, Ordering::Relaxed);
        if runner.run(&cmd.render(&path)).unwrap_or(false) {
            ok = true;
            break;
        }
    }
    let _ = std::fs::remove_file(&path);
    Ok(ok)
}

/// Tags every manifest file as parsable or not. External commands are tried
/// in order until one accepts; unavailable commands are skipped. With none
/// available, the internal check runs if `fallback` is set.
pub fn tag_parsable(
    manifest: &mut DatasetManifest,
    files: &[SourceFile],
    commands: &[ParserCommand],
    fallback: bool,
    runner: &dyn CommandRunner,
    cache: &mut ParseCache,
    scratch: &Path,
) -> Result<ParseReport, DatasetError> {
    let mut audit = Vec::new();
    let mut usable = Vec::new();
    for c in commands {
        if runner.available(c.program()) {
            usable.push(c);
        } else {
            tracing::warn!(parser = %c.name, program = %c.program(), "parser binary not found; skipping");
            audit.push(AuditEntry::new("parse", &c.name, "parser_missing", c.program()));
        }
    }
    let checker = if !usable.is_empty() {
        format!("external:{}", usable.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(","))
    } else if fallback {
        INTERNAL_CHECKER.to_string()
    } else {
        return Err(DatasetError::NoParser);
    };
    if cache.checker != checker {
        cache.checker = checker.clone();
        cache.results.clear();
    }

    let wanted: BTreeMap<&str, &SourceFile> = files
        .iter()
        .filter(|f| manifest.file(&f.file_id).is_some())
        .map(|f| (f.file_id.as_str(), f))
        .collect();
    let todo: Vec<&SourceFile> = wanted.values().filter(|f| !cache.results.contains_key(&f.file_id)).copied().collect();
    let cache_hits = wanted.len() - todo.len();
    let invocations = AtomicUsize::new(0);
    let fresh: Vec<(String, bool)> = if usable.is_empty() {
        todo.par_iter().map(|f| (f.file_id.clone(), internal_check(&f.content))).collect()
    } else {
        std::fs::create_dir_all(scratch)?;
        todo.par_iter()
            .map(|f| Ok((f.file_id.clone(), run_external(f, &usable, runner, scratch, &invocations)?)))
            .collect::<std::io::Result<_>>()?
    };
    cache.results.extend(fresh);

    let flags: BTreeMap<String, bool> =
        wanted.keys().map(|id| (id.to_string(), cache.results.get(*id).copied().unwrap_or(false))).collect();
    manifest.set_parsable(&flags, &checker);
    Ok(ParseReport { checker, invocations: invocations.into_inner(), cache_hits, audit })
}
