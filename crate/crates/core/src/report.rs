//! Uniform result record shared by every check in the crate.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    /// Deterministic evaluation; margin is a normalized slack.
    Exact,
    /// Monte Carlo; margin is measured in standard errors.
    MonteCarlo,
    /// Randomized quasi-Monte Carlo; margin in standard errors.
    QuasiMonteCarlo,
    /// Reports a constant without asserting anything.
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: String,
    pub mode: CheckMode,
    pub params: BTreeMap<String, Value>,
    pub estimates: BTreeMap<String, f64>,
    pub std_errors: BTreeMap<String, f64>,
    pub margin: f64,
    pub pass: bool,
    pub samples: u64,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl CheckReport {
    pub fn new(id: impl Into<String>, mode: CheckMode) -> Self {
        CheckReport {
            id: id.into(),
            mode,
            params: BTreeMap::new(),
            estimates: BTreeMap::new(),
            std_errors: BTreeMap::new(),
            margin: 0.0,
            pass: true,
            samples: 0,
            seed: None,
            note: String::new(),
        }
    }

    pub fn param(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), v.into());
        self
    }

    pub fn estimate(mut self, key: &str, v: f64) -> Self {
        self.estimates.insert(key.to_string(), v);
        self
    }

    pub fn std_error(mut self, key: &str, v: f64) -> Self {
        self.std_errors.insert(key.to_string(), v);
        self
    }

    pub fn with_samples(mut self, n: u64, seed: u64) -> Self {
        self.samples = n;
        self.seed = Some(seed);
        self
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.note = s.into();
        self
    }

    /// Sets the margin and derives `pass` from it: exact checks pass when the
    /// margin is at least `-slack`, sampled checks when it is at least `-slack`
    /// standard errors.
    pub fn judged(mut self, margin: f64, slack: f64) -> Self {
        self.margin = margin;
        self.pass = margin >= -slack;
        self
    }
}

/// Normalized slack of `lhs <= rhs`: positive when it holds.
pub fn slack_le(lhs: f64, rhs: f64) -> f64 {
    if lhs == rhs {
        return 0.0;
    }
    if rhs == f64::INFINITY || lhs == f64::NEG_INFINITY {
        return 1.0;
    }
    (rhs - lhs) / rhs.abs().max(lhs.abs()).max(1.0)
}

/// Tracks the worst point of a sweep over many inequalities.
#[derive(Debug, Clone)]
pub struct Worst {
    pub margin: f64,
    pub at: Vec<(String, f64)>,
    pub count: u64,
    pub violations: u64,
    slack: f64,
}

impl Worst {
    pub fn new(slack: f64) -> Self {
        Worst {
            margin: f64::INFINITY,
            at: Vec::new(),
            count: 0,
            violations: 0,
            slack,
        }
    }

    pub fn push(&mut self, margin: f64, at: &[(&str, f64)]) {
        self.count += 1;
        let m = if margin.is_nan() {
            f64::NEG_INFINITY
        } else {
            margin
        };
        if m < -self.slack {
            self.violations += 1;
        }
        if m < self.margin {
            self.margin = m;
            self.at = at.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        }
    }

    pub fn le(&mut self, lhs: f64, rhs: f64, at: &[(&str, f64)]) {
        self.push(slack_le(lhs, rhs), at);
    }

    pub fn into_report(self, id: &str) -> CheckReport {
        let mut r = CheckReport::new(id, CheckMode::Exact)
            .estimate("points", self.count as f64)
            .estimate("violations", self.violations as f64);
        for (k, v) in &self.at {
            r = r.estimate(&format!("worst_{k}"), *v);
        }
        let m = if self.count == 0 { 0.0 } else { self.margin };
        r.judged(m, self.slack)
    }
}
