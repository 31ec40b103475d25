//! Report assembly and rendering.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

/// One line of a report: a scenario check or a registry case.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entry {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchor: Option<String>,
    pub status: Status,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    /// Present only with `--timings`, which keeps default reports byte-identical.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub error: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub entries: Vec<Entry>,
    pub summary: Summary,
    pub exit_code: i32,
}

impl Report {
    pub fn new(command: impl Into<String>, mut entries: Vec<Entry>) -> Report {
        entries.sort_by(|a, b| a.id.cmp(&b.id));
        let count = |s| entries.iter().filter(|e| e.status == s).count();
        let summary = Summary { pass: count(Status::Pass), fail: count(Status::Fail), error: count(Status::Error) };
        let exit_code = if summary.fail + summary.error == 0 { 0 } else { 1 };
        Report { command: command.into(), entries, summary, exit_code }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let width = self.entries.iter().map(|e| e.id.len()).max().unwrap_or(0);
        let mut out = format!("{}\n", self.command);
        for e in &self.entries {
            out.push_str(&format!("{:<5} {:<width$}  {}", e.status.as_str(), e.id, e.detail));
            if let Some(ms) = e.wall_ms {
                out.push_str(&format!("  [{ms:.1} ms]"));
            }
            out.push('\n');
            if let Some(a) = &e.anchor {
                out.push_str(&format!("      {:<width$}  anchor: {a}\n", ""));
            }
            if let Some(r) = &e.residual {
                out.push_str(&format!("      {:<width$}  residual: {r}\n", ""));
            }
        }
        out.push_str(&format!(
            "summary: {} pass, {} fail, {} error\n",
            self.summary.pass, self.summary.fail, self.summary.error
        ));
        out
    }
}
