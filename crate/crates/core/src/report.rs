//! Machine-readable check outcomes and their aggregation.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    ReportOnly,
    Ambiguous,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::ReportOnly => "REPORT_ONLY",
            Status::Ambiguous => "AMBIGUOUS",
        }
    }

    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckReport {
    pub check_id: String,
    pub seed: u64,
    /// Primes the check ran over.
    pub p: Vec<u32>,
    /// Effective configuration after defaults are resolved.
    pub params: Map<String, Value>,
    pub status: Status,
    pub metrics: Map<String, Value>,
    /// Wall-clock time; only filled in on request since it breaks byte
    /// stability.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

/// Pretty JSON with keys in sorted order.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    // serde_json's map type is ordered, so going through `Value` sorts keys
    let v = serde_json::to_value(value).expect("reports serialize");
    serde_json::to_string_pretty(&v).expect("values serialize")
}

impl CheckReport {
    pub fn to_json(&self) -> String {
        canonical_json(self)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
    pub report_only: usize,
    pub ambiguous: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub reports: Vec<CheckReport>,
    pub summary: Tally,
}

impl Aggregate {
    pub fn new(mut reports: Vec<CheckReport>) -> Self {
        reports.sort_by(|a, b| (&a.check_id, a.seed, &a.p).cmp(&(&b.check_id, b.seed, &b.p)));
        let mut summary = Tally::default();
        for r in &reports {
            match r.status {
                Status::Pass => summary.pass += 1,
                Status::Fail => summary.fail += 1,
                Status::ReportOnly => summary.report_only += 1,
                Status::Ambiguous => summary.ambiguous += 1,
            }
        }
        Self { reports, summary }
    }

    pub fn has_failure(&self) -> bool {
        self.summary.fail > 0
    }

    pub fn to_json(&self) -> String {
        canonical_json(self)
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:>10} {:<14} {:<12}",
            "check", "seed", "p", "status"
        );
        for r in &self.reports {
            let primes = r.p.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
            let time = r
                .runtime_ms
                .map(|t| format!("  {t} ms"))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{:<16} {:>10} {:<14} {:<12}{time}",
                r.check_id,
                r.seed,
                primes,
                r.status.as_str()
            );
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "PASS {}  FAIL {}  REPORT_ONLY {}  AMBIGUOUS {}",
            s.pass, s.fail, s.report_only, s.ambiguous
        );
        out
    }
}

/// Writes the aggregate JSON to `path` when given and returns it with the
/// summary table.
pub fn emit_report(reports: Vec<CheckReport>, path: Option<&Path>) -> Result<Aggregate> {
    let agg = Aggregate::new(reports);
    if let Some(path) = path {
        std::fs::write(path, agg.to_json() + "\n")?;
    }
    Ok(agg)
}

/// Reads either a single report or an aggregate.
pub fn read_reports(text: &str) -> Result<Vec<CheckReport>> {
    let v: Value = serde_json::from_str(text)?;
    if v.get("reports").is_some() {
        let agg: Aggregate = serde_json::from_value(v)?;
        Ok(agg.reports)
    } else {
        Ok(vec![serde_json::from_value(v)?])
    }
}
