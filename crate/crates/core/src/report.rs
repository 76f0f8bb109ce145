//! Structured records of checked inequalities.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "isocap-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegStatus {
    Pass,
    Fail,
    HypothesisFail,
    Skipped,
}

/// One checked inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub name: String,
    /// The inequality or identity this leg checks.
    pub reference: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    pub tolerance: f64,
    pub status: LegStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Leg {
    /// Passes iff `rhs - lhs >= -tolerance`.
    pub fn check(name: impl Into<String>, reference: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = rhs - lhs;
        let status = if margin >= -tolerance { LegStatus::Pass } else { LegStatus::Fail };
        Leg { name: name.into(), reference: reference.into(), lhs, rhs, margin, tolerance, status, note: None }
    }

    pub fn hypothesis_fail(name: impl Into<String>, reference: impl Into<String>, why: impl Into<String>) -> Self {
        Leg {
            name: name.into(),
            reference: reference.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            tolerance: 0.0,
            status: LegStatus::HypothesisFail,
            note: Some(why.into()),
        }
    }

    pub fn skipped(name: impl Into<String>, reference: impl Into<String>, why: impl Into<String>) -> Self {
        Leg { status: LegStatus::Skipped, ..Leg::hypothesis_fail(name, reference, why) }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == LegStatus::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    HypothesisFail,
}

impl Verdict {
    /// Process exit code: numeric failures dominate hypothesis failures.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::HypothesisFail => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub title: String,
    pub legs: Vec<Leg>,
    pub environment: BTreeMap<String, serde_json::Value>,
    pub verdict: Verdict,
}

impl VerificationReport {
    pub fn new(title: impl Into<String>) -> Self {
        VerificationReport {
            schema: SCHEMA.into(),
            title: title.into(),
            legs: Vec::new(),
            environment: BTreeMap::new(),
            verdict: Verdict::Pass,
        }
    }

    pub fn push(&mut self, leg: Leg) {
        self.legs.push(leg);
        self.verdict = self.compute_verdict();
    }

    pub fn extend(&mut self, other: VerificationReport) {
        for leg in other.legs {
            self.legs.push(leg);
        }
        for (k, v) in other.environment {
            self.environment.entry(k).or_insert(v);
        }
        self.verdict = self.compute_verdict();
    }

    pub fn env(&mut self, key: impl Into<String>, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.environment.insert(key.into(), v);
    }

    fn compute_verdict(&self) -> Verdict {
        if self.legs.iter().any(|l| l.status == LegStatus::Fail) {
            Verdict::Fail
        } else if self.legs.iter().any(|l| l.status == LegStatus::HypothesisFail) {
            Verdict::HypothesisFail
        } else {
            Verdict::Pass
        }
    }

    pub fn all_passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Smallest margin over the legs that were evaluated.
    pub fn worst_margin(&self) -> f64 {
        self.legs.iter().filter(|l| l.margin.is_finite()).map(|l| l.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Fixed-width table for terminals.
    pub fn render_table(&self) -> String {
        let mut out = format!("{}  [{}]\n", self.title, self.schema);
        out.push_str(&format!(
            "{:<40} {:>14} {:>14} {:>12} {:>9}  {}\n",
            "leg", "lhs", "rhs", "margin", "tol", "status"
        ));
        for l in &self.legs {
            out.push_str(&format!(
                "{:<40} {:>14.6e} {:>14.6e} {:>12.3e} {:>9.1e}  {:?}\n",
                truncate(&l.name, 40),
                l.lhs,
                l.rhs,
                l.margin,
                l.tolerance,
                l.status
            ));
        }
        out.push_str(&format!("verdict: {:?}\n", self.verdict));
        out
    }

    /// `t,lhs,rhs,margin,tol,pass` rows for legs named with a time suffix
    /// `@t=...`.
    pub fn sweep_csv(&self) -> String {
        let mut out = String::from("t,lhs,rhs,margin,tol,pass\n");
        for l in &self.legs {
            let t = l.name.rsplit_once("@t=").and_then(|(_, t)| t.parse::<f64>().ok()).unwrap_or(f64::NAN);
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                t,
                l.lhs,
                l.rhs,
                l.margin,
                l.tolerance,
                l.passed()
            ));
        }
        out
    }
}

fn truncate(s: &str, n: usize) -> String {
    if s.chars().count() <= n {
        s.to_string()
    } else {
        s.chars().take(n - 1).chain(std::iter::once('~')).collect()
    }
}
