//! Machine-readable reports shared by the checks and the CLI.

use indexmap::IndexMap;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Approximate,
    Error,
}

impl Status {
    pub fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    /// Combines two verdicts: error dominates fail, fail dominates
    /// approximate, approximate dominates pass.
    pub fn and(self, other: Status) -> Status {
        fn rank(s: Status) -> u8 {
            match s {
                Status::Pass => 0,
                Status::Approximate => 1,
                Status::Fail => 2,
                Status::Error => 3,
            }
        }
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

/// One violation (or notable point) found by a check. `at` holds element
/// names or other labels locating the witness.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Witness {
    pub at: Vec<String>,
    pub check: String,
    pub detail: String,
}

impl Witness {
    pub fn new(check: &str, at: Vec<String>, detail: impl Into<String>) -> Witness {
        Witness {
            check: check.to_string(),
            at,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(skip_serializing_if = "IndexMap::is_empty")]
    pub values: IndexMap<String, serde_json::Value>,
    pub witnesses: Vec<Witness>,
    pub citations: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            command: command.to_string(),
            status: Status::Pass,
            value: None,
            values: IndexMap::new(),
            witnesses: Vec::new(),
            citations: Vec::new(),
        }
    }

    pub fn cite(&mut self, check: &str) {
        if !self.citations.iter().any(|c| c == check) {
            self.citations.push(check.to_string());
        }
    }

    /// Records the outcome of one named check.
    pub fn record(&mut self, check: &str, witnesses: Vec<Witness>) {
        self.cite(check);
        if !witnesses.is_empty() {
            self.status = self.status.and(Status::Fail);
        }
        self.witnesses.extend(witnesses);
    }

    pub fn set(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Sorts witnesses so identical inputs give byte-identical output.
    pub fn finish(mut self) -> Report {
        self.witnesses.sort();
        self.witnesses.dedup();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
