//! Run reports: a JSON document with a fixed key order and a plain-text
//! summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;
use toposforge::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Instance {
    pub name: String,
    pub outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Counts {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Section {
    pub name: String,
    /// Whether a failure here makes the run fail.
    pub asserted: bool,
    pub counts: Counts,
    pub instances: Vec<Instance>,
    pub notes: Vec<String>,
}

impl Section {
    pub fn new(name: impl Into<String>, asserted: bool) -> Self {
        Section {
            name: name.into(),
            asserted,
            counts: Counts::default(),
            instances: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, o: &Outcome) {
        match o {
            Outcome::Pass => self.counts.pass += 1,
            Outcome::Fail(_) => self.counts.fail += 1,
            Outcome::Inconclusive(_) => self.counts.inconclusive += 1,
        }
        self.instances.push(Instance {
            name: name.into(),
            outcome: o.label(),
            detail: o.detail().map(str::to_string),
        });
    }

    pub fn extend<'a>(&mut self, items: impl IntoIterator<Item = &'a (String, Outcome)>) {
        for (n, o) in items {
            self.push(n.clone(), o);
        }
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn status(&self) -> Status {
        if self.counts.fail > 0 {
            Status::Fail
        } else if self.counts.inconclusive > 0 {
            Status::Inconclusive
        } else {
            Status::Pass
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub config: BTreeMap<String, Value>,
    pub sections: Vec<Section>,
    pub data: BTreeMap<String, Value>,
    pub status: Status,
}

impl Report {
    pub fn new(command: &str, config: BTreeMap<String, Value>) -> Self {
        Report {
            command: command.to_string(),
            config,
            sections: Vec::new(),
            data: BTreeMap::new(),
            status: Status::Pass,
        }
    }

    pub fn add(&mut self, s: Section) {
        self.sections.push(s);
    }

    pub fn finish(mut self) -> Self {
        let asserted = self.sections.iter().filter(|s| s.asserted).map(Section::status);
        self.status = if asserted.clone().any(|s| s == Status::Fail) {
            Status::Fail
        } else if asserted.into_iter().any(|s| s == Status::Inconclusive) {
            Status::Inconclusive
        } else {
            Status::Pass
        };
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}: {:?}", self.command, self.status);
        for s in &self.sections {
            let tag = if s.asserted { "" } else { " (diagnostic)" };
            let _ = writeln!(
                out,
                "  [{}] {}{tag}: {} pass, {} fail, {} inconclusive",
                s.status_label(),
                s.name,
                s.counts.pass,
                s.counts.fail,
                s.counts.inconclusive
            );
            for i in s.instances.iter().filter(|i| i.outcome != "pass").take(5) {
                let _ = writeln!(out, "      {} {}: {}", i.outcome, i.name, i.detail.as_deref().unwrap_or(""));
            }
            for n in &s.notes {
                let _ = writeln!(out, "      {n}");
            }
        }
        out
    }
}

impl Section {
    fn status_label(&self) -> &'static str {
        match self.status() {
            Status::Pass => "pass",
            Status::Fail if self.asserted => "FAIL",
            Status::Fail => "found",
            Status::Inconclusive => "inconclusive",
        }
    }
}
