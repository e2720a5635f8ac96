//! Uniform `(tag, verdict, witnesses)` reports.

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub tag: String,
    pub verdict: Option<String>,
    pub witnesses: Value,
}

impl Report {
    pub fn new(tag: &str, verdict: Option<&str>, witnesses: impl Serialize) -> Self {
        Report {
            tag: tag.to_string(),
            verdict: verdict.map(str::to_string),
            witnesses: serde_json::to_value(witnesses).expect("reports serialize"),
        }
    }

    /// Builds a report whose verdict is a serialized enum value.
    pub fn with_verdict(tag: &str, verdict: impl Serialize, witnesses: impl Serialize) -> Self {
        let v = serde_json::to_value(verdict).expect("verdicts serialize");
        Report::new(tag, v.as_str(), witnesses)
    }

    /// Negative verdicts: a property fails or a recoding is ambiguous.
    pub fn is_failure(&self) -> bool {
        matches!(self.verdict.as_deref(), Some("FAILS") | Some("AMBIGUOUS"))
    }

    pub fn human(&self) -> String {
        let head = match &self.verdict {
            Some(v) => format!("{}: {v}", self.tag),
            None => self.tag.clone(),
        };
        if self.witnesses.is_null() {
            return head + "\n";
        }
        let body = serde_json::to_string_pretty(&self.witnesses).expect("reports serialize");
        format!("{head}\n{body}\n")
    }
}
