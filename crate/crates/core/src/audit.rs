use serde::{Deserialize, Serialize};

/// A non-fatal event worth keeping for later inspection: a skipped file,
/// a malformed construct, a missing parser binary.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AuditEntry {
    pub stage: String,
    pub subject: String,
    pub event: String,
    pub detail: String,
}

impl AuditEntry {
    pub fn new(
        stage: impl Into<String>,
        subject: impl Into<String>,
        event: impl Into<String>,
        detail: impl Into<String>,
    ) -> Self {
        Self { stage: stage.into(), subject: subject.into(), event: event.into(), detail: detail.into() }
    }
}
