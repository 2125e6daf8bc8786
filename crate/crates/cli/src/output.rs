use conlab_core::ResidualReport;
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: &str = "conlab.report/v1";

/// Exit codes shared by every subcommand.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const DEGENERATE: i32 = 3;
}

/// What a subcommand hands back before it is wrapped into a [`Document`].
pub struct Outcome {
    pub pass: bool,
    pub reports: Vec<ResidualReport>,
    pub details: Value,
}

impl Outcome {
    pub fn new(pass: bool, reports: Vec<ResidualReport>, details: Value) -> Self {
        Outcome { pass, reports, details }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorInfo {
    pub kind: &'static str,
    pub message: String,
}

/// The single report format. Field order is fixed by the struct and maps
/// inside `details` are sorted, so output is byte-stable for a fixed seed.
#[derive(Debug, Serialize)]
pub struct Document {
    pub schema: &'static str,
    pub command: String,
    pub pass: bool,
    pub reports: Vec<ResidualReport>,
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
}

impl Document {
    pub fn from_outcome(command: String, o: Outcome) -> Self {
        Document {
            schema: SCHEMA,
            command,
            pass: o.pass,
            reports: o.reports,
            details: o.details,
            error: None,
        }
    }

    pub fn from_error(command: String, kind: &'static str, message: String) -> Self {
        Document {
            schema: SCHEMA,
            command,
            pass: false,
            reports: Vec::new(),
            details: Value::Object(Default::default()),
            error: Some(ErrorInfo { kind, message }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{}: {}\n",
            self.command,
            if self.pass { "PASS" } else { "FAIL" }
        );
        if let Some(e) = &self.error {
            out.push_str(&format!("error ({}): {}\n", e.kind, e.message));
        }
        if !self.reports.is_empty() {
            let width = self.reports.iter().map(|r| r.equation.len()).max().unwrap_or(8).max(8);
            out.push_str(&format!(
                "{:<width$}  {:>11}  {:>11}  {:>9}  {:>6}  verdict\n",
                "equation", "max", "mean", "tolerance", "points"
            ));
            for r in &self.reports {
                out.push_str(&format!(
                    "{:<width$}  {:>11.3e}  {:>11.3e}  {:>9.1e}  {:>6}  {}\n",
                    r.equation,
                    r.max,
                    r.mean,
                    r.tolerance,
                    r.points,
                    if r.pass { "pass" } else { "FAIL" }
                ));
            }
        }
        if let Value::Object(map) = &self.details {
            for (k, v) in map {
                let shown = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                out.push_str(&format!("{k}: {shown}\n"));
            }
        }
        out
    }
}
