//! Module and function snippets, split into a definition (the header through
//! its terminating `;`) and a body (everything after, through the end keyword).
//!
//! Extraction works on the lexer's token stream, so `module` inside a comment
//! or string never starts a snippet.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::AuditEntry;
use crate::lexer::{self, LexOutput, Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnippetKind {
    Module,
    Function,
}

impl SnippetKind {
    pub fn end_keyword(self) -> &'static str {
        match self {
            SnippetKind::Module => "endmodule",
            SnippetKind::Function => "endfunction",
        }
    }

    fn of_start(tok: &Token) -> Option<Self> {
        if tok.kind != TokenKind::Keyword {
            return None;
        }
        match tok.text.as_str() {
            "module" | "macromodule" => Some(SnippetKind::Module),
            "function" => Some(SnippetKind::Function),
            _ => None,
        }
    }

    /// Kind implied by the first token of a definition.
    pub fn of_definition(first_token: &str) -> Option<Self> {
        match first_token {
            "module" | "macromodule" => Some(SnippetKind::Module),
            "function" => Some(SnippetKind::Function),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snippet {
    pub snippet_id: String,
    pub kind: SnippetKind,
    pub name: String,
    pub definition_text: String,
    pub body_text: String,
    pub file_id: String,
    /// Inclusive first and last line.
    pub line_span: (usize, usize),
    /// Number of enclosing extracted constructs (a function inside a module is 1).
    pub nesting_depth: u32,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("region does not start with module or function")]
    NotASnippet,
    #[error("no top-level `;` before the end keyword")]
    NoHeaderTerminator,
    #[error("missing {0}")]
    MissingEnd(&'static str),
    #[error("could not find the construct name")]
    NoName,
}

#[derive(Debug, Default, Clone)]
pub struct ExtractOutcome {
    /// Sorted by position in the file.
    pub snippets: Vec<Snippet>,
    pub audit: Vec<AuditEntry>,
}

/// `function` keywords that declare a prototype with no body.
pub(crate) fn is_prototype(tokens: &[Token], idx: usize) -> bool {
    let prev = |n: usize| idx.checked_sub(n).map(|i| &tokens[i]);
    match prev(1) {
        Some(t) if t.is_keyword("extern") => true,
        Some(t) if t.is_keyword("virtual") => prev(2).is_some_and(|p| p.is_keyword("pure")),
        Some(t) if t.is_keyword("import") || t.is_keyword("export") => true,
        Some(t) if t.kind == TokenKind::StringLiteral => {
            prev(2).is_some_and(|p| p.is_keyword("import") || p.is_keyword("export"))
        }
        _ => false,
    }
}

struct Header {
    name: String,
    terminator: usize,
}

/// Finds the header terminator and the name in `tokens[start..end]`, where
/// `tokens[start]` is the start keyword and `tokens[end]` its end keyword.
fn parse_header(tokens: &[Token], start: usize, end: usize) -> Result<Header, ExtractError> {
    let mut depth = 0i32;
    let mut name: Option<&Token> = None;
    let mut name_closed = false;
    for i in start + 1..end {
        let t = &tokens[i];
        if depth == 0 && !name_closed {
            if t.is_punct("(") || t.is_punct("#") || t.is_punct(";") {
                name_closed = true;
            } else if t.kind == TokenKind::Identifier || t.is_keyword("new") {
                name = Some(t);
            }
        }
        if t.is_punct("(") {
            depth += 1;
        } else if t.is_punct(")") {
            depth -= 1;
        } else if depth == 0 && t.is_punct(";") {
            let name = name.ok_or(ExtractError::NoName)?;
            return Ok(Header { name: name.text.clone(), terminator: i });
        }
    }
    Err(ExtractError::NoHeaderTerminator)
}

/// Splits a snippet's source region into definition and body text.
pub fn split_definition_body(region: &str) -> Result<(String, String), ExtractError> {
    let lex = lexer::lex(region);
    let tokens = &lex.tokens;
    let kind = tokens.first().and_then(SnippetKind::of_start).ok_or(ExtractError::NotASnippet)?;
    let end = tokens
        .iter()
        .rposition(|t| t.is_keyword(kind.end_keyword()))
        .ok_or(ExtractError::MissingEnd(kind.end_keyword()))?;
    let header = parse_header(tokens, 0, end)?;
    let cut = tokens[header.terminator].end;
    let start = tokens[0].start;
    Ok((region[start..cut].to_string(), region[cut..tokens[end].end].to_string()))
}

fn snippet_from(
    lex: &LexOutput,
    source: &str,
    file_id: &str,
    kind: SnippetKind,
    (start, end): (usize, usize),
    nesting_depth: u32,
) -> Result<Snippet, ExtractError> {
    let tokens = &lex.tokens;
    let header = parse_header(tokens, start, end)?;
    let begin = tokens[start].start;
    let cut = tokens[header.terminator].end;
    let finish = tokens[end].end;
    Ok(Snippet {
        snippet_id: format!("{file_id}:{begin}"),
        kind,
        name: header.name,
        definition_text: source[begin..cut].to_string(),
        body_text: source[cut..finish].to_string(),
        file_id: file_id.to_string(),
        line_span: (tokens[start].line, tokens[end].line),
        nesting_depth,
    })
}

#[derive(Default)]
struct OpenConstruct {
    /// Token index of the outermost open start keyword.
    start: Option<usize>,
    depth: usize,
}

/// Extracts every module and function in a lexed file. Functions nested in a
/// module are emitted in addition to the module. Same-kind nesting keeps only
/// the outermost construct; unterminated or malformed constructs are skipped
/// and noted in the audit list.
pub fn extract_snippets(lex: &LexOutput, source: &str, file_id: &str) -> ExtractOutcome {
    let mut out = ExtractOutcome::default();
    let mut modules = OpenConstruct::default();
    let mut functions = OpenConstruct::default();
    let tokens = &lex.tokens;
    let note = |out: &mut ExtractOutcome, tok: &Token, event: &str, detail: String| {
        out.audit.push(AuditEntry::new("extract", format!("{file_id}:{}", tok.line), event, detail));
    };

    for (i, tok) in tokens.iter().enumerate() {
        if tok.kind != TokenKind::Keyword {
            continue;
        }
        let is_end = |k: SnippetKind| tok.text == k.end_keyword();
        let started = SnippetKind::of_start(tok).filter(|k| *k == SnippetKind::Module || !is_prototype(tokens, i));
        if let Some(kind) = started {
            let open = if kind == SnippetKind::Module { &mut modules } else { &mut functions };
            if open.depth == 0 {
                open.start = Some(i);
            } else {
                note(&mut out, tok, "nested_same_kind", format!("inner {} ignored", tok.text));
            }
            open.depth += 1;
            continue;
        }
        for kind in [SnippetKind::Module, SnippetKind::Function] {
            if !is_end(kind) {
                continue;
            }
            let (open, enclosing) = match kind {
                SnippetKind::Module => (&mut modules, 0),
                SnippetKind::Function => (&mut functions, u32::from(modules.depth > 0)),
            };
            if open.depth == 0 {
                note(&mut out, tok, "stray_end", tok.text.clone());
                continue;
            }
            open.depth -= 1;
            if open.depth > 0 {
                continue;
            }
            let start = open.start.take().expect("outermost start recorded");
            match snippet_from(lex, source, file_id, kind, (start, i), enclosing) {
                Ok(s) => out.snippets.push(s),
                Err(e) => note(&mut out, &tokens[start], "malformed", e.to_string()),
            }
        }
    }
    for open in [&modules, &functions] {
        if let Some(start) = open.start {
            note(&mut out, &tokens[start], "unterminated", tokens[start].text.clone());
        }
    }
    out.snippets.sort_by_key(|s| (s.line_span.0, s.snippet_id.clone()));
    out
}

/// Convenience: lex `source` and extract.
pub fn extract_from_source(source: &str, file_id: &str) -> ExtractOutcome {
    extract_snippets(&lexer::lex(source), source, file_id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use vcf_testkit::samples;

    fn norm(s: &str) -> String {
        s.split_whitespace().collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn module_sample_from_dataset() {
        let out = extract_from_source(samples::CLK_DIVIDER, "f");
        assert_eq!(out.snippets.len(), 1);
        let s = &out.snippets[0];
        assert_eq!((s.kind, s.name.as_str()), (SnippetKind::Module, "clk_divider"));
        assert_eq!(
            norm(&s.definition_text),
            "module clk_divider #(parameter WIDTH = 24) (input clk_in, input rst_n, output clk_out);"
        );
        assert!(s.body_text.trim_start().starts_with("reg [WIDTH-1:0] cnt_div;"));
        assert!(s.body_text.ends_with("endmodule"));
        assert_eq!(format!("{}{}", s.definition_text, s.body_text), samples::CLK_DIVIDER.trim_end());
    }

    #[test]
    fn function_sample_from_dataset() {
        let out = extract_from_source(samples::SPLIT_STRING, "f");
        assert_eq!(out.snippets.len(), 1);
        let s = &out.snippets[0];
        assert_eq!((s.kind, s.name.as_str()), (SnippetKind::Function, "split_string"));
        assert_eq!(
            norm(&s.definition_text),
            "function void split_string(string str, byte step, ref string result[$]);"
        );
        assert!(s.body_text.ends_with("endfunction"));
    }

    #[test]
    fn package_only_file_has_no_snippets() {
        assert!(extract_from_source("package p; endpackage", "f").snippets.is_empty());
    }

    #[test]
    fn minimal_module_split() {
        assert_eq!(split_definition_body("module m; endmodule").unwrap(), ("module m;".into(), " endmodule".into()));
        let out = extract_from_source("module m; endmodule", "f");
        assert_eq!(out.snippets[0].definition_text, "module m;");
        assert_eq!(out.snippets[0].body_text.trim(), "endmodule");
    }

    #[test]
    fn split_errors() {
        assert_eq!(split_definition_body("wire w;"), Err(ExtractError::NotASnippet));
        assert_eq!(split_definition_body("module m (a, b) endmodule"), Err(ExtractError::NoHeaderTerminator));
        assert_eq!(split_definition_body("module m;"), Err(ExtractError::MissingEnd("endmodule")));
    }

    #[test]
    fn function_return_type_stays_in_definition() {
        let (def, body) = split_definition_body("function [7:0] add(input [7:0] a, b); add = a + b; endfunction").unwrap();
        assert_eq!(def, "function [7:0] add(input [7:0] a, b);");
        assert_eq!(body, " add = a + b; endfunction");
    }

    #[test]
    fn non_ansi_ports_fall_in_body() {
        let src = "module m(a, y);\n  input a;\n  output y;\n  assign y = a;\nendmodule\n";
        let s = &extract_from_source(src, "f").snippets[0];
        assert_eq!(s.definition_text, "module m(a, y);");
        assert!(s.body_text.starts_with("\n  input a;"));
    }

    #[test]
    fn nested_functions_are_emitted_separately() {
        let src = "module top(input a);\n function automatic int twice(int x);\n  return 2*x;\n endfunction\nendmodule\nfunction int free(int y); return y; endfunction";
        let out = extract_from_source(src, "f");
        let got: Vec<_> = out.snippets.iter().map(|s| (s.kind, s.name.as_str(), s.nesting_depth)).collect();
        assert_eq!(
            got,
            [(SnippetKind::Module, "top", 0), (SnippetKind::Function, "twice", 1), (SnippetKind::Function, "free", 0)]
        );
        assert_eq!(out.snippets[1].line_span, (2, 4));
    }

    #[test]
    fn decoys_in_comments_and_strings_are_ignored() {
        let src = "// module fake; endmodule\n/* function f; endfunction */\nmodule real_top(input c);\n initial $display(\"module x;\");\nendmodule";
        let out = extract_from_source(src, "f");
        assert_eq!(out.snippets.len(), 1);
        assert_eq!(out.snippets[0].name, "real_top");
    }

    #[test]
    fn unterminated_constructs_are_skipped_with_audit() {
        let out = extract_from_source("module a; wire w;\n", "f");
        assert!(out.snippets.is_empty());
        assert_eq!(out.audit[0].event, "unterminated");
        let out = extract_from_source("endmodule module b; endmodule", "f");
        assert_eq!(out.snippets.len(), 1);
        assert_eq!(out.audit[0].event, "stray_end");
    }

    #[test]
    fn prototypes_do_not_open_functions() {
        let src = "class c;\n pure virtual function void f(int a);\n extern function int g();\n function new(); endfunction\nendclass\nimport \"DPI-C\" function int h(int x);";
        let out = extract_from_source(src, "f");
        assert_eq!(out.snippets.len(), 1);
        assert_eq!(out.snippets[0].name, "new");
    }

    #[test]
    fn parameterized_and_scoped_names() {
        assert_eq!(split_definition_body("module #(parameter W = 1); endmodule"), Err(ExtractError::NoName));
        let s = &extract_from_source("function automatic my_pkg::word_t cls::get(); endfunction", "f").snippets[0];
        assert_eq!(s.name, "get");
    }

    #[test]
    fn same_kind_snippets_do_not_overlap() {
        let src = "module a; module inner; endmodule endmodule module b; endmodule";
        let out = extract_from_source(src, "f");
        let names: Vec<_> = out.snippets.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["a", "b"]);
        assert_eq!(out.audit[0].event, "nested_same_kind");
    }
}
