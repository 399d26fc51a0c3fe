use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::scenario::ScenarioEcho;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    /// A negative control that failed the way it should.
    ExpectedFailure,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
            Status::ExpectedFailure => "expected-failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub id: String,
    pub status: Status,
    pub summary: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<String>,
    pub evidence: serde_json::Value,
    /// Wall time, present only when timings were requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub suite: String,
    pub scenario: ScenarioEcho,
    pub claims: Vec<ClaimResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

impl Report {
    pub fn new(suite: &str, scenario: ScenarioEcho, mut claims: Vec<ClaimResult>) -> Self {
        claims.sort_by(|a, b| a.id.cmp(&b.id));
        Report {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            suite: suite.into(),
            scenario,
            claims,
        }
    }

    pub fn count(&self, status: Status) -> usize {
        self.claims.iter().filter(|c| c.status == status).count()
    }

    pub fn passed(&self) -> bool {
        self.count(Status::Fail) == 0
    }

    /// 0 when nothing failed, 1 on a failure, 3 when `strict` and a check
    /// was skipped.
    pub fn exit_code(&self, strict: bool) -> i32 {
        if !self.passed() {
            1
        } else if strict && self.count(Status::Skipped) > 0 {
            3
        } else {
            0
        }
    }
}

pub fn emit_report(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => render_text(report),
    }
}

fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let width = report.claims.iter().map(|c| c.id.len()).max().unwrap_or(0);
    let _ = writeln!(
        out,
        "{} {}  scenario {}  suite {}",
        report.tool, report.version, report.scenario.name, report.suite
    );
    for c in &report.claims {
        let tags = if c.tags.is_empty() {
            String::new()
        } else {
            format!(" [{}]", c.tags.join(", "))
        };
        let time = c
            .runtime_ms
            .map(|t| format!(" ({t} ms)"))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{:<16} {:<width$}  {}{tags}{time}",
            c.status.as_str(),
            c.id,
            c.summary
        );
    }
    let _ = writeln!(
        out,
        "{} pass, {} fail, {} skipped, {} expected-failure",
        report.count(Status::Pass),
        report.count(Status::Fail),
        report.count(Status::Skipped),
        report.count(Status::ExpectedFailure)
    );
    out
}
