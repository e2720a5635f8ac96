use serde::Serialize;

/// Three-valued outcome of a property check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Holds,
    Unknown,
    Fails,
}

impl Verdict {
    /// Combines two verdicts: any failure wins, then any unknown.
    pub fn and(self, other: Verdict) -> Verdict {
        self.max(other)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "HOLDS",
            Verdict::Unknown => "UNKNOWN",
            Verdict::Fails => "FAILS",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
