//! File-level anomaly removal. Each file gets exactly one [`FilterDecision`];
//! checks run in a fixed order and the first failing one supplies the reason.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::SourceFile;
use crate::lexer::{self, CommentSpan, LexOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Kept,
    Dropped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    Autogenerated,
    LicenseNotice,
    TooManyLines,
    LineTooLong,
    TooSmall,
    EmptyAfterComments,
    Passed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterDecision {
    pub file_id: String,
    pub verdict: Verdict,
    pub reason: Reason,
    /// Matched keyword or offending measurement; empty for passing files.
    pub evidence: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FilterConfigError {
    #[error("keyword list `{0}` is empty")]
    EmptyList(&'static str),
    #[error("keyword list `{0}` contains an empty or non-lowercase entry")]
    BadKeyword(&'static str),
    #[error("max_lines must be greater than 1")]
    MaxLines,
    #[error("max_line_length must be positive")]
    MaxLineLength,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub autogen_keywords: Vec<String>,
    pub license_blacklist: Vec<String>,
    pub license_whitelist: Vec<String>,
    pub max_lines: usize,
    pub max_line_length: usize,
    /// Files with fewer code characters are dropped as too small. Zero
    /// disables that check and enables the plain emptiness check instead.
    pub min_code_chars: usize,
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            autogen_keywords: strings(&[
                "automatically generated",
                "auto-generated",
                "autogenerated",
                "generated by",
                "do not edit",
            ]),
            license_blacklist: strings(&["general public license", "gpl", "all rights reserved"]),
            license_whitelist: strings(&[
                "mit license",
                "apache license",
                "bsd license",
                "permission is hereby granted",
            ]),
            max_lines: 10_000,
            max_line_length: 1_000,
            min_code_chars: 20,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), FilterConfigError> {
        for (name, list) in [
            ("autogen_keywords", &self.autogen_keywords),
            ("license_blacklist", &self.license_blacklist),
            ("license_whitelist", &self.license_whitelist),
        ] {
            if list.is_empty() {
                return Err(FilterConfigError::EmptyList(name));
            }
            if list.iter().any(|k| k.is_empty() || k.to_lowercase() != *k) {
                return Err(FilterConfigError::BadKeyword(name));
            }
        }
        if self.max_lines <= 1 {
            return Err(FilterConfigError::MaxLines);
        }
        if self.max_line_length == 0 {
            return Err(FilterConfigError::MaxLineLength);
        }
        Ok(())
    }
}

fn lowered(comments: &[CommentSpan]) -> Vec<String> {
    comments.iter().map(|c| c.text.to_lowercase()).collect()
}

fn first_match<'k>(haystacks: &[String], keywords: &'k [String]) -> Option<&'k str> {
    keywords
        .iter()
        .find(|k| haystacks.iter().any(|h| h.contains(k.as_str())))
        .map(String::as_str)
}

/// First keyword (in list order) found in any comment. Code is never scanned.
pub fn scan_autogenerated(comments: &[CommentSpan], keywords: &[String]) -> Option<String> {
    first_match(&lowered(comments), keywords).map(str::to_string)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NoticeVerdict {
    Keep,
    Drop { blacklisted: String },
}

/// Drops a file when its comments mention a blacklisted license keyword and
/// no whitelisted one.
pub fn scan_license_notice(comments: &[CommentSpan], blacklist: &[String], whitelist: &[String]) -> NoticeVerdict {
    let text = lowered(comments);
    match first_match(&text, blacklist) {
        Some(bad) if first_match(&text, whitelist).is_none() => NoticeVerdict::Drop { blacklisted: bad.to_string() },
        _ => NoticeVerdict::Keep,
    }
}

/// Size and emptiness checks, in the order lines, line length, code size, emptiness.
pub fn size_filter(text: &str, lex: &LexOutput, cfg: &FilterConfig) -> Option<(Reason, String)> {
    let line_count = text.lines().count();
    if line_count > cfg.max_lines {
        return Some((Reason::TooManyLines, format!("lines={line_count} > {}", cfg.max_lines)));
    }
    if let Some((idx, len)) = text
        .lines()
        .map(|l| l.chars().count())
        .enumerate()
        .find(|&(_, len)| len > cfg.max_line_length)
    {
        return Some((
            Reason::LineTooLong,
            format!("line {} has {len} chars > {}", idx + 1, cfg.max_line_length),
        ));
    }
    if lex.code_char_count < cfg.min_code_chars {
        return Some((
            Reason::TooSmall,
            format!("code_chars={} < {}", lex.code_char_count, cfg.min_code_chars),
        ));
    }
    if lex.code_char_count == 0 {
        return Some((Reason::EmptyAfterComments, "code_chars=0".to_string()));
    }
    None
}

/// Decision for one file.
pub fn decide(file: &SourceFile, cfg: &FilterConfig) -> FilterDecision {
    let lex = lexer::lex(&file.content);
    let dropped = |reason, evidence: String| FilterDecision {
        file_id: file.file_id.clone(),
        verdict: Verdict::Dropped,
        reason,
        evidence,
    };
    if let Some(k) = scan_autogenerated(&lex.comments, &cfg.autogen_keywords) {
        return dropped(Reason::Autogenerated, k);
    }
    if let NoticeVerdict::Drop { blacklisted } =
        scan_license_notice(&lex.comments, &cfg.license_blacklist, &cfg.license_whitelist)
    {
        return dropped(Reason::LicenseNotice, blacklisted);
    }
    if let Some((reason, evidence)) = size_filter(&file.content, &lex, cfg) {
        return dropped(reason, evidence);
    }
    FilterDecision {
        file_id: file.file_id.clone(),
        verdict: Verdict::Kept,
        reason: Reason::Passed,
        evidence: String::new(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterOutcome {
    /// Kept files, sorted by file id.
    pub kept: Vec<SourceFile>,
    /// One decision per input file, sorted by file id.
    pub decisions: Vec<FilterDecision>,
}

pub fn apply_filters(files: &[SourceFile], cfg: &FilterConfig) -> FilterOutcome {
    let mut decided: Vec<(FilterDecision, &SourceFile)> =
        files.par_iter().map(|f| (decide(f, cfg), f)).collect();
    decided.sort_by(|a, b| a.0.file_id.cmp(&b.0.file_id));
    let kept = decided
        .iter()
        .filter(|(d, _)| d.verdict == Verdict::Kept)
        .map(|(_, f)| (*f).clone())
        .collect();
    FilterOutcome { kept, decisions: decided.into_iter().map(|(d, _)| d).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexer::lex;

    fn kw(v: &[&str]) -> Vec<String> {
        strings(v)
    }

    fn file(content: &str) -> SourceFile {
        SourceFile::new("r", &format!("{}.v", content.len()), content.to_string(), content.len() as u64)
    }

    #[test]
    fn autogen_scan_examples() {
        let l = lex("// Automatically generated by Vivado\nmodule m; endmodule");
        assert_eq!(scan_autogenerated(&l.comments, &kw(&["automatically generated"])).as_deref(), Some("automatically generated"));
        let l = lex("reg autogenerated_reg;");
        assert_eq!(scan_autogenerated(&l.comments, &kw(&["autogenerated"])), None);
        assert_eq!(scan_autogenerated(&[], &kw(&["x"])), None);
    }

    #[test]
    fn autogen_scan_returns_first_keyword_in_list_order() {
        let l = lex("// do not edit\n// generated by tool");
        let got = scan_autogenerated(&l.comments, &kw(&["generated by", "do not edit"]));
        assert_eq!(got.as_deref(), Some("generated by"));
    }

    #[test]
    fn license_notice_examples() {
        let bl = kw(&["general public license"]);
        let wl = kw(&["mit license"]);
        let l = lex("// GNU General Public License\nwire w;");
        assert_eq!(
            scan_license_notice(&l.comments, &bl, &wl),
            NoticeVerdict::Drop { blacklisted: "general public license".into() }
        );
        let l = lex("// general public license\n/* or the MIT License */");
        assert_eq!(scan_license_notice(&l.comments, &bl, &wl), NoticeVerdict::Keep);
        assert_eq!(scan_license_notice(&[], &bl, &wl), NoticeVerdict::Keep);
    }

    #[test]
    fn size_boundaries() {
        let cfg = FilterConfig { max_lines: 10_000, max_line_length: 1_000, ..Default::default() };
        let many = "wire w;\n".repeat(10_001);
        assert_eq!(size_filter(&many, &lex(&many), &cfg).unwrap().0, Reason::TooManyLines);
        let exact = "wire w;\n".repeat(10_000);
        assert_eq!(size_filter(&exact, &lex(&exact), &cfg), None);
        let long = format!("wire {};", "a".repeat(994));
        assert_eq!(long.chars().count(), 1_000);
        assert_eq!(size_filter(&long, &lex(&long), &cfg), None);
        let longer = format!("wire {};", "a".repeat(995));
        assert_eq!(size_filter(&longer, &lex(&longer), &cfg).unwrap().0, Reason::LineTooLong);
    }

    #[test]
    fn comment_only_files_are_too_small_or_empty() {
        let cfg = FilterConfig { min_code_chars: 1, ..Default::default() };
        let t = "/* comments only */";
        assert_eq!(size_filter(t, &lex(t), &cfg).unwrap().0, Reason::TooSmall);
        let cfg = FilterConfig { min_code_chars: 0, ..Default::default() };
        assert_eq!(size_filter(t, &lex(t), &cfg).unwrap().0, Reason::EmptyAfterComments);
    }

    #[test]
    fn first_failing_check_wins() {
        let cfg = FilterConfig::default();
        let d = decide(&file("// auto-generated\nwire w;"), &cfg);
        assert_eq!((d.verdict, d.reason), (Verdict::Dropped, Reason::Autogenerated));
        assert_eq!(d.evidence, "auto-generated");
        let ok = decide(&file("module counter(input clk); reg [3:0] c; endmodule"), &cfg);
        assert_eq!((ok.verdict, ok.reason), (Verdict::Kept, Reason::Passed));
    }

    #[test]
    fn apply_filters_conserves_files() {
        let cfg = FilterConfig::default();
        let files = vec![
            file("module counter(input clk); reg [3:0] c; endmodule"),
            file("// Copyright, all rights reserved\nmodule counter2(input clk); endmodule"),
            file("// nothing"),
        ];
        let out = apply_filters(&files, &cfg);
        assert_eq!(out.decisions.len(), 3);
        assert_eq!(out.kept.len(), 1);
        assert!(out.decisions.windows(2).all(|w| w[0].file_id < w[1].file_id));
        assert!(out
            .decisions
            .iter()
            .all(|d| (d.verdict == Verdict::Dropped) == (d.reason != Reason::Passed)));
        let empty = apply_filters(&[], &cfg);
        assert!(empty.kept.is_empty() && empty.decisions.is_empty());
    }

    #[test]
    fn config_validation() {
        assert_eq!(FilterConfig::default().validate(), Ok(()));
        let bad = FilterConfig { max_lines: 1, ..Default::default() };
        assert_eq!(bad.validate(), Err(FilterConfigError::MaxLines));
        let bad = FilterConfig { autogen_keywords: vec![], ..Default::default() };
        assert_eq!(bad.validate(), Err(FilterConfigError::EmptyList("autogen_keywords")));
        let bad = FilterConfig { license_whitelist: kw(&["MIT"]), ..Default::default() };
        assert_eq!(bad.validate(), Err(FilterConfigError::BadKeyword("license_whitelist")));
    }
}
