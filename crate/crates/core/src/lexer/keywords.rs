use std::collections::BTreeSet;

/// IEEE 1364-2005 reserved words.
pub const VERILOG_2005: &[&str] = &[
    "always", "and", "assign", "automatic", "begin", "buf", "bufif0", "bufif1", "case", "casex",
    "casez", "cell", "cmos", "config", "deassign", "default", "defparam", "design", "disable",
    "edge", "else", "end", "endcase", "endconfig", "endfunction", "endgenerate", "endmodule",
    "endprimitive", "endspecify", "endtable", "endtask", "event", "for", "force", "forever",
    "fork", "function", "generate", "genvar", "highz0", "highz1", "if", "ifnone", "incdir",
    "include", "initial", "inout", "input", "instance", "integer", "join", "large", "liblist",
    "library", "localparam", "macromodule", "medium", "module", "nand", "negedge", "nmos", "nor",
    "noshowcancelled", "not", "notif0", "notif1", "or", "output", "parameter", "pmos", "posedge",
    "primitive", "pull0", "pull1", "pulldown", "pullup", "pulsestyle_ondetect",
    "pulsestyle_onevent", "rcmos", "real", "realtime", "reg", "release", "repeat", "rnmos",
    "rpmos", "rtran", "rtranif0", "rtranif1", "scalared", "showcancelled", "signed", "small",
    "specify", "specparam", "strong0", "strong1", "supply0", "supply1", "table", "task", "time",
    "tran", "tranif0", "tranif1", "tri", "tri0", "tri1", "triand", "trior", "trireg", "unsigned",
    "use", "uwire", "vectored", "wait", "wand", "weak0", "weak1", "while", "wire", "wor", "xnor",
    "xor",
];

/// Commonly used SystemVerilog additions.
pub const SYSTEM_VERILOG: &[&str] = &[
    "alias", "always_comb", "always_ff", "always_latch", "assert", "assume", "before", "bind",
    "bins", "bit", "break", "byte", "chandle", "class", "clocking", "const", "constraint",
    "context", "continue", "cover", "covergroup", "coverpoint", "cross", "dist", "do", "endclass",
    "endclocking", "endgroup", "endinterface", "endpackage", "endprogram", "endproperty",
    "endsequence", "enum", "export", "extends", "extern", "final", "first_match", "foreach",
    "forkjoin", "iff", "ignore_bins", "illegal_bins", "import", "inside", "int", "interface",
    "intersect", "join_any", "join_none", "local", "logic", "longint", "modport", "new", "null",
    "package", "packed", "priority", "program", "property", "protected", "pure", "rand", "randc",
    "randcase", "randomize", "ref", "return", "sequence", "shortint", "shortreal", "solve",
    "static", "string", "struct", "super", "tagged", "this", "throughout", "timeprecision",
    "timeunit", "type", "typedef", "union", "unique", "unique0", "var", "virtual", "void",
    "wait_order", "wildcard", "with", "within",
];

/// The reserved-word table a [`Lexer`](super::Lexer) classifies identifiers against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordSet {
    words: BTreeSet<String>,
}

impl KeywordSet {
    pub fn verilog_2005() -> Self {
        Self::from_words(VERILOG_2005.iter().copied())
    }

    /// Verilog-2005 plus the SystemVerilog additions. This is the default.
    pub fn system_verilog() -> Self {
        Self::from_words(VERILOG_2005.iter().chain(SYSTEM_VERILOG).copied())
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self { words: words.into_iter().map(Into::into).collect() }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl Default for KeywordSet {
    fn default() -> Self {
        Self::system_verilog()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_have_no_duplicates_across_lists() {
        let a: BTreeSet<_> = VERILOG_2005.iter().collect();
        let b: BTreeSet<_> = SYSTEM_VERILOG.iter().collect();
        assert_eq!(a.len(), VERILOG_2005.len());
        assert_eq!(b.len(), SYSTEM_VERILOG.len());
        assert!(a.is_disjoint(&b));
    }

    #[test]
    fn verilog_only_table_excludes_sv_words() {
        let kw = KeywordSet::verilog_2005();
        assert!(kw.contains("module"));
        assert!(!kw.contains("logic"));
        assert!(KeywordSet::default().contains("logic"));
    }
}
