//! Comment-aware tokenization of Verilog and SystemVerilog source text.
//!
//! The lexer is total: every byte of the input ends up in exactly one of a
//! comment, a string literal, a code token, or whitespace. Malformed input
//! (unterminated comments or strings, stray characters) is reported through
//! [`LexWarning`]s rather than errors.

mod keywords;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use keywords::{KeywordSet, SYSTEM_VERILOG, VERILOG_2005};

/// Document separator used in token streams. Source text can never lex to it:
/// in ordinary mode `<|sep|>` lexes as five separate tokens.
pub const SEPARATOR: &str = "<|sep|>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Keyword,
    Identifier,
    Number,
    StringLiteral,
    Operator,
    Punctuation,
    /// Only produced by a lexer built with [`Lexer::recognizing_separator`].
    Separator,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based line.
    pub line: usize,
    /// 1-based column, counted in characters (a tab is one column).
    pub column: usize,
    /// Byte offset of the first byte.
    pub start: usize,
    /// Byte offset one past the last byte.
    pub end: usize,
}

impl Token {
    pub fn is_keyword(&self, word: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text == word
    }

    pub fn is_punct(&self, p: &str) -> bool {
        matches!(self.kind, TokenKind::Punctuation | TokenKind::Operator) && self.text == p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommentKind {
    Line,
    Block,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommentSpan {
    pub kind: CommentKind,
    /// Comment text including its delimiters.
    pub text: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexWarning {
    UnterminatedBlockComment { offset: usize },
    UnterminatedString { offset: usize },
    UnexpectedChar { offset: usize, ch: char },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LexOutput {
    pub tokens: Vec<Token>,
    pub comments: Vec<CommentSpan>,
    /// Non-whitespace characters outside comments.
    pub code_char_count: usize,
    pub warnings: Vec<LexWarning>,
}

/// A contiguous part of the input: either one comment or the code between comments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Comment { start: usize, end: usize },
    Code { start: usize, end: usize },
}

impl LexOutput {
    pub fn unterminated_comment(&self) -> bool {
        self.warnings
            .iter()
            .any(|w| matches!(w, LexWarning::UnterminatedBlockComment { .. }))
    }

    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }

    /// Splits `[0, len)` into alternating code and comment regions in offset order.
    pub fn regions(&self, len: usize) -> Vec<Region> {
        let mut out = Vec::with_capacity(self.comments.len() * 2 + 1);
        let mut pos = 0;
        for c in &self.comments {
            if c.start > pos {
                out.push(Region::Code { start: pos, end: c.start });
            }
            out.push(Region::Comment { start: c.start, end: c.end });
            pos = c.end;
        }
        if pos < len {
            out.push(Region::Code { start: pos, end: len });
        }
        out
    }

    pub fn token_texts(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.text.clone()).collect()
    }
}

/// Set of distinct token strings of a file, used for near-duplicate detection.
pub type TokenSet = BTreeSet<String>;

/// Distinct token texts of a lexed file. Comments never contribute.
pub fn token_set(lex: &LexOutput) -> TokenSet {
    lex.tokens.iter().map(|t| t.text.clone()).collect()
}

/// Lex with the default (Verilog + SystemVerilog) keyword table.
pub fn lex(text: &str) -> LexOutput {
    Lexer::default().lex(text)
}

/// Lex raw bytes, replacing invalid UTF-8 sequences with U+FFFD first.
pub fn lex_bytes(bytes: &[u8]) -> LexOutput {
    lex(&String::from_utf8_lossy(bytes))
}

/// Token texts of `text`, the tokenization used by the metrics and the LM.
pub fn tokenize(text: &str) -> Vec<String> {
    lex(text).token_texts()
}

/// Replaces every comment with a single space. Idempotent.
pub fn strip_comments(text: &str) -> String {
    let out = lex(text);
    let mut s = String::with_capacity(text.len());
    for region in out.regions(text.len()) {
        match region {
            Region::Code { start, end } => s.push_str(&text[start..end]),
            Region::Comment { .. } => s.push(' '),
        }
    }
    s
}

// Longest match first.
const OPERATORS: &[&str] = &[
    "<<<=", ">>>=", "===", "!==", "==?", "!=?", "<<<", ">>>", "<<=", ">>=", "->>", "<->", "|->",
    "|=>", "==", "!=", "<=", ">=", "&&", "||", "**", "<<", ">>", "~&", "~|", "~^", "^~", "->",
    "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "::", "+:", "-:", "##", "+", "-",
    "*", "/", "%", "<", ">", "!", "~", "&", "|", "^", "=", "?", ":", "@", "#", "'", "$", "`",
];

const PUNCTUATION: &[char] = &['(', ')', '[', ']', '{', '}', ';', ',', '.'];

#[derive(Debug, Clone, Default)]
pub struct Lexer {
    keywords: KeywordSet,
    separator: bool,
}

impl Lexer {
    pub fn new(keywords: KeywordSet) -> Self {
        Self { keywords, separator: false }
    }

    /// A lexer that emits [`SEPARATOR`] as a single [`TokenKind::Separator`]
    /// token. Used to read back exported chunk streams.
    pub fn recognizing_separator(mut self) -> Self {
        self.separator = true;
        self
    }

    pub fn keywords(&self) -> &KeywordSet {
        &self.keywords
    }

    pub fn lex(&self, text: &str) -> LexOutput {
        Scanner { lexer: self, text, bytes: text.as_bytes(), pos: 0, line: 1, col: 1, out: LexOutput::default() }
            .run()
    }
}

struct Scanner<'a> {
    lexer: &'a Lexer,
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
    out: LexOutput,
}

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_'
}

fn is_ident_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'$'
}

fn is_base_char(b: u8) -> bool {
    matches!(b, b'b' | b'B' | b'o' | b'O' | b'd' | b'D' | b'h' | b'H')
}

fn is_based_digit(b: u8) -> bool {
    b.is_ascii_hexdigit() || matches!(b, b'_' | b'x' | b'X' | b'z' | b'Z' | b'?')
}

impl<'a> Scanner<'a> {
    fn peek(&self, ahead: usize) -> Option<u8> {
        self.bytes.get(self.pos + ahead).copied()
    }

    fn current_char(&self) -> char {
        self.text[self.pos..].chars().next().expect("in bounds")
    }

    /// Moves to byte offset `to`, keeping line/column in sync.
    fn advance_to(&mut self, to: usize) {
        for ch in self.text[self.pos..to].chars() {
            if ch == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        self.pos = to;
    }

    fn run(mut self) -> LexOutput {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.advance_to(self.pos + 1);
                continue;
            }
            if b >= 0x80 && self.current_char().is_whitespace() {
                let next = self.pos + self.current_char().len_utf8();
                self.advance_to(next);
                continue;
            }
            match (b, self.peek(1)) {
                (b'/', Some(b'/')) => self.line_comment(),
                (b'/', Some(b'*')) => self.block_comment(),
                (b'"', _) => self.string(),
                _ => self.code_token(),
            }
        }
        self.out
    }

    fn line_comment(&mut self) {
        let start = self.pos;
        let end = self.text[start..].find('\n').map_or(self.bytes.len(), |i| start + i);
        self.push_comment(CommentKind::Line, start, end);
    }

    fn block_comment(&mut self) {
        let start = self.pos;
        let end = match self.text[start + 2..].find("*/") {
            Some(i) => start + 2 + i + 2,
            None => {
                self.out.warnings.push(LexWarning::UnterminatedBlockComment { offset: start });
                self.bytes.len()
            }
        };
        self.push_comment(CommentKind::Block, start, end);
    }

    fn push_comment(&mut self, kind: CommentKind, start: usize, end: usize) {
        self.out.comments.push(CommentSpan { kind, text: self.text[start..end].to_string(), start, end });
        self.advance_to(end);
    }

    fn string(&mut self) {
        let start = self.pos;
        let mut i = start + 1;
        let end = loop {
            match self.bytes.get(i) {
                None => {
                    self.out.warnings.push(LexWarning::UnterminatedString { offset: start });
                    break i;
                }
                Some(b'"') => break i + 1,
                Some(b'\n') => {
                    self.out.warnings.push(LexWarning::UnterminatedString { offset: start });
                    break i;
                }
                Some(b'\\') => {
                    // An escape never swallows a multi-byte character partially.
                    i += 1;
                    if let Some(ch) = self.text.get(i..).and_then(|s| s.chars().next()) {
                        i += ch.len_utf8();
                    }
                }
                Some(_) => i += 1,
            }
        };
        self.push_token(TokenKind::StringLiteral, start, end);
    }

    fn code_token(&mut self) {
        let start = self.pos;
        let b = self.bytes[start];
        if self.lexer.separator && self.text[start..].starts_with(SEPARATOR) {
            self.push_token(TokenKind::Separator, start, start + SEPARATOR.len());
            return;
        }
        if is_ident_start(b) {
            let end = self.scan_while(start + 1, is_ident_char);
            let kind = if self.lexer.keywords.contains(&self.text[start..end]) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            };
            self.push_token(kind, start, end);
            return;
        }
        if (b == b'$' || b == b'`') && self.peek(1).is_some_and(is_ident_start) {
            let end = self.scan_while(start + 1, is_ident_char);
            self.push_token(TokenKind::Identifier, start, end);
            return;
        }
        if b == b'\\' && self.peek(1).is_some_and(|n| n.is_ascii_graphic()) {
            // Ends at whitespace or at the start of a comment.
            let rest = &self.text[start..];
            let end = [rest.find(char::is_whitespace), rest.find("//"), rest.find("/*")]
                .into_iter()
                .flatten()
                .min()
                .map_or(self.bytes.len(), |i| start + i);
            self.push_token(TokenKind::Identifier, start, end);
            return;
        }
        if b.is_ascii_digit() {
            let end = self.number(start);
            self.push_token(TokenKind::Number, start, end);
            return;
        }
        if b == b'\'' {
            if let Some(end) = self.based_suffix(start) {
                self.push_token(TokenKind::Number, start, end);
                return;
            }
            if let Some(n) = self.peek(1) {
                let after = self.peek(2);
                if matches!(n, b'0' | b'1' | b'x' | b'X' | b'z' | b'Z')
                    && !after.is_some_and(is_ident_char)
                {
                    self.push_token(TokenKind::Number, start, start + 2);
                    return;
                }
            }
        }
        if PUNCTUATION.contains(&(b as char)) {
            self.push_token(TokenKind::Punctuation, start, start + 1);
            return;
        }
        let rest = &self.text[start..];
        if let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(**op)) {
            self.push_token(TokenKind::Operator, start, start + op.len());
            return;
        }
        let ch = self.current_char();
        self.out.warnings.push(LexWarning::UnexpectedChar { offset: start, ch });
        self.push_token(TokenKind::Punctuation, start, start + ch.len_utf8());
    }

    fn scan_while(&self, mut i: usize, pred: fn(u8) -> bool) -> usize {
        while i < self.bytes.len() && pred(self.bytes[i]) {
            i += 1;
        }
        i
    }

    /// Decimal, real, or sized based literal starting at a digit.
    fn number(&self, start: usize) -> usize {
        let digits = |b: u8| b.is_ascii_digit() || b == b'_';
        let mut end = self.scan_while(start, digits);
        if self.bytes.get(end) == Some(&b'.') && self.bytes.get(end + 1).is_some_and(u8::is_ascii_digit) {
            end = self.scan_while(end + 1, digits);
        }
        if matches!(self.bytes.get(end), Some(b'e' | b'E')) {
            let mut exp = end + 1;
            if matches!(self.bytes.get(exp), Some(b'+' | b'-')) {
                exp += 1;
            }
            if self.bytes.get(exp).is_some_and(u8::is_ascii_digit) {
                end = self.scan_while(exp, digits);
            }
        }
        if self.bytes.get(end) == Some(&b'\'') {
            if let Some(based_end) = self.based_suffix(end) {
                end = based_end;
            }
        }
        end
    }

    /// `'[sS]<base><digits>` starting at the apostrophe, if present.
    fn based_suffix(&self, apostrophe: usize) -> Option<usize> {
        let mut i = apostrophe + 1;
        if matches!(self.bytes.get(i), Some(b's' | b'S')) {
            i += 1;
        }
        if !self.bytes.get(i).copied().is_some_and(is_base_char) {
            return None;
        }
        i += 1;
        let end = self.scan_while(i, is_based_digit);
        (end > i).then_some(end)
    }

    fn push_token(&mut self, kind: TokenKind, start: usize, end: usize) {
        let text = &self.text[start..end];
        self.out.code_char_count += text.chars().filter(|c| !c.is_whitespace()).count();
        self.out.tokens.push(Token {
            kind,
            text: text.to_string(),
            line: self.line,
            column: self.col,
            start,
            end,
        });
        self.advance_to(end);
    }
}
