//! Machine-readable verification rows.

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One verified property. `pass` is `None` when the property is only
/// measured, e.g. because the hypothesis it depends on is not met.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub params: Value,
    pub pass: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<Value>,
}

impl CheckRow {
    pub fn new(check: impl Into<String>, params: Value) -> Self {
        CheckRow { check: check.into(), params, pass: None, counterexample: None, measured: None }
    }

    /// Passes unless a counterexample is given.
    pub fn outcome(mut self, counterexample: Option<String>) -> Self {
        self.pass = Some(counterexample.is_none());
        self.counterexample = counterexample;
        self
    }

    pub fn pass(mut self, pass: bool) -> Self {
        self.pass = Some(pass);
        self
    }

    pub fn measured(mut self, value: Value) -> Self {
        self.measured = Some(value);
        self
    }

    pub fn failed(&self) -> bool {
        self.pass == Some(false)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<CheckRow>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, row: CheckRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = CheckRow>) {
        self.rows.extend(rows);
    }

    /// True when no row failed; measured-only rows do not count against it.
    pub fn all_pass(&self) -> bool {
        !self.rows.iter().any(CheckRow::failed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| r.failed())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl FromIterator<CheckRow> for Report {
    fn from_iter<I: IntoIterator<Item = CheckRow>>(iter: I) -> Self {
        Report { rows: iter.into_iter().collect() }
    }
}
