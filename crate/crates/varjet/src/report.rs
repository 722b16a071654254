//! Machine-readable check reports.
//!
//! Every verification command emits one JSON object per check, one per line,
//! with a fixed key order (`check`, `seed`, `samples`, `max_abs_residual`,
//! `tolerance`, `pass`) so that equal inputs produce byte-identical output.

use serde::Serialize;

/// Result of one numerical check. `pass` is `max_abs_residual <= tolerance`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Report {
    pub check: String,
    pub seed: u64,
    pub samples: usize,
    pub max_abs_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Report {
    pub fn new(
        check: impl Into<String>,
        seed: u64,
        samples: usize,
        max_abs_residual: f64,
        tolerance: f64,
    ) -> Self {
        Report {
            check: check.into(),
            seed,
            samples,
            max_abs_residual,
            tolerance,
            pass: max_abs_residual <= tolerance,
        }
    }

    /// The report as a single JSON line (no trailing newline).
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

/// Render reports as newline-separated JSON, with trailing newline.
pub fn render_reports(reports: &[Report]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&r.to_json_line());
        out.push('\n');
    }
    out
}
