//! Structured outcome of a single theorem check.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    HypothesisNotMet,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
            Status::HypothesisNotMet => "hypothesis-not-met",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Value {
    Int(i64),
    Real(f64),
    Bool(bool),
    Text(String),
    Reals(Vec<f64>),
    Indices(Vec<usize>),
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(i64::try_from(v).unwrap_or(i64::MAX))
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(i64::try_from(v).unwrap_or(i64::MAX))
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl From<Vec<f64>> for Value {
    fn from(v: Vec<f64>) -> Self {
        Value::Reals(v)
    }
}

impl From<Vec<usize>> for Value {
    fn from(v: Vec<usize>) -> Self {
        Value::Indices(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub name: String,
    pub value: Value,
}

/// Concrete object backing a verdict: a vertex pair, an index, or an ordering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Pair { label: String, x: usize, y: usize },
    Index { label: String, value: usize },
    Ordering { label: String, order: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub subject: String,
    pub theorem: String,
    pub status: Status,
    pub evidence: Vec<Evidence>,
    pub witnesses: Vec<Witness>,
    pub max_deviation: Option<f64>,
    pub tolerance: f64,
}

impl TheoremReport {
    pub fn new(subject: impl Into<String>, theorem: impl Into<String>, tolerance: f64) -> Self {
        Self {
            subject: subject.into(),
            theorem: theorem.into(),
            status: Status::Pass,
            evidence: Vec::new(),
            witnesses: Vec::new(),
            max_deviation: None,
            tolerance,
        }
    }

    pub fn evidence(&mut self, name: impl Into<String>, value: impl Into<Value>) -> &mut Self {
        self.evidence.push(Evidence { name: name.into(), value: value.into() });
        self
    }

    pub fn witness(&mut self, w: Witness) -> &mut Self {
        self.witnesses.push(w);
        self
    }

    /// Records a deviation; the maximum seen so far is kept. Non-finite values
    /// are stored as `f64::MAX` so the report stays serializable.
    pub fn deviation(&mut self, dev: f64) -> &mut Self {
        let dev = if dev.is_finite() { dev.abs() } else { f64::MAX };
        self.max_deviation = Some(self.max_deviation.map_or(dev, |m| m.max(dev)));
        self
    }

    /// Downgrades the status to `fail`, attaching the witness that caused it.
    pub fn fail(&mut self, reason: impl Into<String>, witness: Witness) -> &mut Self {
        self.status = Status::Fail;
        self.evidence("failure", reason.into());
        self.witnesses.push(witness);
        self
    }

    /// Marks the report with a non-failing terminal status and a reason.
    pub fn settle(&mut self, status: Status, reason: impl Into<String>) -> &mut Self {
        debug_assert_ne!(status, Status::Fail, "use fail() so a witness is attached");
        if self.status != Status::Fail {
            self.status = status;
        }
        self.evidence("reason", reason.into());
        self
    }

    pub fn find(&self, name: &str) -> Option<&Value> {
        self.evidence.iter().find(|e| e.name == name).map(|e| &e.value)
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Report invariants: failures carry a witness and deviations are nonnegative.
    pub fn is_well_formed(&self) -> bool {
        (self.status != Status::Fail || !self.witnesses.is_empty())
            && self.max_deviation.is_none_or(|d| d >= 0.0)
    }
}
