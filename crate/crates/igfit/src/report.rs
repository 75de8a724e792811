//! Machine-readable test reports.
//!
//! The JSON field order is part of the output contract (the schema in
//! `schemas/report.schema.json` names every field); floats serialize in
//! shortest round-trip form, so no precision is lost.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub command: String,
    pub dataset: String,
    pub test: String,
    pub estimator: String,
    /// Weight family for the characterization statistics ("exp" or
    /// "exp-sq"); null for statistics without a weight.
    pub weight: Option<String>,
    /// Tuning parameter where the statistic takes one; null otherwise.
    pub a: Option<f64>,
    pub n: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub critical_value: f64,
    pub b: usize,
    pub alpha: f64,
    pub seed: u64,
    pub reject: bool,
    pub tool_version: String,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization is total");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "test            {}", self.test);
        let _ = writeln!(out, "dataset         {}", self.dataset);
        let _ = writeln!(out, "estimator       {}", self.estimator);
        if let Some(w) = &self.weight {
            let _ = writeln!(out, "weight          {w}");
        }
        if let Some(a) = self.a {
            let _ = writeln!(out, "a               {a}");
        }
        let _ = writeln!(out, "n               {}", self.n);
        let _ = writeln!(out, "statistic       {}", self.statistic);
        let _ = writeln!(out, "p-value         {}", self.p_value);
        let _ = writeln!(out, "critical value  {}  (alpha = {})", self.critical_value, self.alpha);
        let _ = writeln!(out, "bootstrap b     {}", self.b);
        let _ = writeln!(out, "seed            {}", self.seed);
        let _ = writeln!(out, "reject          {}", self.reject);
        let _ = writeln!(out, "tool version    {}", self.tool_version);
        out
    }
}
